//! Seed derivation.
//!
//! Every stochastic choice in a run draws from its own stream, keyed by a
//! label and derived from one master seed:
//!
//! ```text
//! derive(master, label) = splitmix64(master ^ fnv1a64(label))
//! ```
//!
//! Labels used by the experiment runner: `train-ic` (training-system initial
//! condition), `drive-ic` (driving-system initial condition), `weights`
//! (W_in and A), `r0` / `r0-aux` (reservoir initial states). Per-stage or
//! per-copy streams append an index, e.g. `weights/2`.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a64(label: &str) -> u64 {
    label.bytes().fold(FNV_OFFSET, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive(master: u64, label: &str) -> u64 {
    splitmix64(master ^ fnv1a64(label))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_give_distinct_streams() {
        let a = derive(42, "weights");
        assert_eq!(a, derive(42, "weights"));
        assert_ne!(a, derive(42, "r0"));
        assert_ne!(a, derive(43, "weights"));
    }
}
