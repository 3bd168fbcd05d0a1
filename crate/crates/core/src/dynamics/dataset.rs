use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::integrate::advance;
use super::system::VectorField;
use super::trajectory::Trajectory;
use crate::error::{Error, Result};

/// How a ground-truth series is sampled: integration step, discarded
/// transient, and number of recorded rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingProtocol {
    pub dt: f64,
    pub transient_time: f64,
    pub record_len: usize,
    /// RK4 steps per recorded sample; the integrator runs at `dt / substeps`.
    #[serde(default = "one")]
    pub substeps: usize,
}

fn one() -> usize {
    1
}

impl Default for SamplingProtocol {
    fn default() -> Self {
        SamplingProtocol {
            dt: 0.02,
            transient_time: 1e3,
            record_len: 10_000,
            substeps: 1,
        }
    }
}

/// Partition of a recorded series into washout, training, and test rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub washout: usize,
    pub train: usize,
    pub test: usize,
}

impl Default for DatasetSplit {
    fn default() -> Self {
        DatasetSplit {
            washout: 400,
            train: 2600,
            test: 7000,
        }
    }
}

impl DatasetSplit {
    /// Washout and training lengths, with everything left over for testing.
    pub fn for_record(washout: usize, train: usize, record_len: usize) -> Result<Self> {
        let split = DatasetSplit {
            washout,
            train,
            test: record_len.saturating_sub(washout + train),
        };
        split.check(record_len)?;
        Ok(split)
    }

    pub fn check(&self, record_len: usize) -> Result<()> {
        if self.washout == 0 || self.train == 0 || self.test == 0 {
            return Err(Error::Contract(format!(
                "split lengths must be positive: {self:?}"
            )));
        }
        if self.total() > record_len {
            return Err(Error::Contract(format!(
                "split {self:?} needs {} rows, record has {record_len}",
                self.total()
            )));
        }
        Ok(())
    }

    pub fn total(&self) -> usize {
        self.washout + self.train + self.test
    }

    /// First row of the test segment.
    pub fn test_start(&self) -> usize {
        self.washout + self.train
    }
}

/// Draws one state uniformly from `(-1, 1)^dim`.
pub fn random_initial(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Integrates from a random initial condition, discards the transient,
/// records `record_len` rows, and min-max normalizes each channel.
pub fn make_dataset<F: VectorField + ?Sized>(
    field: &F,
    protocol: &SamplingProtocol,
    split: DatasetSplit,
    seed: u64,
) -> Result<(Trajectory, DatasetSplit)> {
    let raw = record(field, protocol, seed)?;
    split.check(raw.len())?;
    Ok((raw.normalize()?, split))
}

/// The raw (unnormalized) record behind [`make_dataset`].
pub fn record<F: VectorField + ?Sized>(
    field: &F,
    protocol: &SamplingProtocol,
    seed: u64,
) -> Result<Trajectory> {
    let SamplingProtocol {
        dt,
        transient_time,
        record_len,
        substeps,
    } = *protocol;
    if !(dt > 0.0 && dt.is_finite()) || substeps == 0 {
        return Err(Error::Domain(format!(
            "invalid sampling step {dt} / {substeps}"
        )));
    }
    if record_len < 2 || !(transient_time >= 0.0) {
        return Err(Error::Contract(format!(
            "need record_len >= 2 and transient >= 0, got {record_len} / {transient_time}"
        )));
    }
    let dim = field.dim();
    let h = dt / substeps as f64;
    let mut state = random_initial(dim, seed);

    let transient_steps = (transient_time / dt).round() as usize * substeps;
    let t_start = if transient_steps > 0 {
        advance(field, &mut state, 0.0, h, transient_steps, |_, _, _| {})?
    } else {
        0.0
    };

    let mut data = Vec::with_capacity(record_len * dim);
    data.extend_from_slice(&state);
    let n_steps = (record_len - 1) * substeps;
    advance(field, &mut state, t_start, h, n_steps, |n, _, s| {
        if n % substeps == 0 {
            data.extend_from_slice(s);
        }
    })
    .map_err(|e| match e {
        Error::Divergence { step, magnitude } => Error::Divergence {
            step: step + transient_steps,
            magnitude,
        },
        other => other,
    })?;
    Trajectory::from_rows(dt, t_start, dim, data)
}
