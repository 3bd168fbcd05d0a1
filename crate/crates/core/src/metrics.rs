//! Synchronization errors, prediction horizons, and dynamical invariants.

use serde::{Deserialize, Serialize};

use crate::dynamics::{advance, random_initial, Trajectory, VectorField};
use crate::error::{Error, Result};
use crate::training::median;

/// Relative tolerance on the mean zero-crossing interval for the phase flag.
pub const PHASE_TOLERANCE: f64 = 0.10;

/// Default normalized-error threshold for the valid prediction time.
pub const VPT_THRESHOLD: f64 = 0.4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncReport {
    /// Mean absolute error per channel over the window.
    pub errors: Vec<f64>,
    /// Whether the two series oscillate with matching crossing intervals.
    pub phase_sync: Vec<bool>,
    pub transient_discard: usize,
    pub window: usize,
}

/// Per-channel mean absolute error over `window` rows after `discard`.
/// `window = None` uses everything after the discard.
pub fn sync_error(
    truth: &Trajectory,
    predicted: &Trajectory,
    discard: usize,
    window: Option<usize>,
) -> Result<SyncReport> {
    if truth.n_channels() != predicted.n_channels() {
        return Err(Error::Contract(format!(
            "channel mismatch: {} vs {}",
            truth.n_channels(),
            predicted.n_channels()
        )));
    }
    let available = truth.len().min(predicted.len()).saturating_sub(discard);
    let window = window.unwrap_or(available);
    if window == 0 || window > available {
        return Err(Error::Contract(format!(
            "window of {window} rows after discarding {discard} exceeds the {available} available"
        )));
    }
    let rows = discard..discard + window;
    let n = truth.n_channels();
    let mut errors = vec![0.0; n];
    for i in rows.clone() {
        for (c, (a, b)) in truth.row(i).iter().zip(predicted.row(i)).enumerate() {
            errors[c] += (a - b).abs();
        }
    }
    errors.iter_mut().for_each(|e| *e /= window as f64);
    let phase_sync = (0..n)
        .map(|c| {
            let t: Vec<f64> = rows.clone().map(|i| truth.row(i)[c]).collect();
            let p: Vec<f64> = rows.clone().map(|i| predicted.row(i)[c]).collect();
            phase_locked(&t, &p)
        })
        .collect();
    Ok(SyncReport {
        errors,
        phase_sync,
        transient_discard: discard,
        window,
    })
}

/// Upward crossings of the series' own mean, as fractional indices.
pub fn mean_crossings(series: &[f64]) -> Vec<f64> {
    if series.is_empty() {
        return Vec::new();
    }
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    series
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] - mean < 0.0 && w[1] - mean >= 0.0)
        .map(|(i, w)| {
            let (a, b) = (w[0] - mean, w[1] - mean);
            i as f64 + a / (a - b)
        })
        .collect()
}

fn mean_interval(crossings: &[f64]) -> Option<f64> {
    (crossings.len() >= 3)
        .then(|| (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64)
}

/// Zero-crossing comparison of two mean-removed series: both must oscillate
/// and their mean crossing intervals must agree to [`PHASE_TOLERANCE`].
pub fn phase_locked(truth: &[f64], predicted: &[f64]) -> bool {
    match (
        mean_interval(&mean_crossings(truth)),
        mean_interval(&mean_crossings(predicted)),
    ) {
        (Some(t), Some(p)) => ((p - t) / t).abs() < PHASE_TOLERANCE,
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MismatchRow {
    pub delta: f64,
    /// Median over seeds of each channel's synchronization error.
    pub errors: Vec<f64>,
}

/// Sweeps a parameter mismatch. `evaluate(delta, seed_index)` runs one
/// driven experiment; each row holds per-channel medians over seeds.
pub fn mismatch_sweep<E>(deltas: &[f64], n_seeds: usize, evaluate: E) -> Result<Vec<MismatchRow>>
where
    E: Fn(f64, usize) -> Result<SyncReport> + Sync,
{
    use rayon::prelude::*;
    if n_seeds == 0 {
        return Err(Error::Contract(
            "mismatch sweep needs at least one seed".into(),
        ));
    }
    let jobs: Vec<(usize, usize)> = (0..deltas.len())
        .flat_map(|d| (0..n_seeds).map(move |s| (d, s)))
        .collect();
    let reports = jobs
        .par_iter()
        .map(|&(d, s)| evaluate(deltas[d], s))
        .collect::<Result<Vec<_>>>()?;
    Ok(deltas
        .iter()
        .enumerate()
        .map(|(d, &delta)| {
            let chunk = &reports[d * n_seeds..(d + 1) * n_seeds];
            let width = chunk[0].errors.len();
            let errors = (0..width)
                .map(|c| median(&mut chunk.iter().map(|r| r.errors[c]).collect::<Vec<_>>()))
                .collect();
            MismatchRow { delta, errors }
        })
        .collect())
}

/// Spearman rank correlation, with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "spearman needs equal lengths");
    let (rx, ry) = (ranks(x), ranks(y));
    pearson(&rx, &ry)
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let rank = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidTime {
    /// Horizon in model time units.
    pub model_time: f64,
    /// Horizon in Lyapunov times (`model_time * lambda`).
    pub lyapunov_times: f64,
    /// Number of predicted rows inside the threshold.
    pub steps: usize,
    /// The error never crossed the threshold within the compared rows.
    pub saturated: bool,
}

/// Time until `‖truth - predicted‖ / sqrt(<‖truth‖²>)` first exceeds
/// `threshold`, scaled by `lambda_max`. A prediction shorter than the truth
/// (e.g. truncated on divergence) ends at its last row.
pub fn valid_prediction_time(
    truth: &Trajectory,
    predicted: &Trajectory,
    lambda_max: f64,
    threshold: f64,
) -> Result<ValidTime> {
    if truth.n_channels() != predicted.n_channels() || truth.is_empty() {
        return Err(Error::Contract(
            "valid prediction time needs matching, non-empty series".into(),
        ));
    }
    let rms = (truth
        .rows()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        / truth.len() as f64)
        .sqrt();
    let scale = if rms > 0.0 { rms } else { 1.0 };
    let compared = truth.len().min(predicted.len());
    let mut steps = compared;
    for i in 0..compared {
        let err = truth
            .row(i)
            .iter()
            .zip(predicted.row(i))
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
            / scale;
        if !(err <= threshold) {
            steps = i;
            break;
        }
    }
    let saturated = steps == truth.len();
    let model_time = steps as f64 * truth.dt();
    Ok(ValidTime {
        model_time,
        lyapunov_times: model_time * lambda_max,
        steps,
        saturated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovOptions {
    pub dt: f64,
    pub total_time: f64,
    pub renorm_interval: f64,
    pub transient_time: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    /// Largest exponent in nats per unit time.
    pub lambda_max: f64,
    pub integration_time: f64,
    pub renormalization_interval: f64,
    pub dt: f64,
}

impl LyapunovEstimate {
    /// The exponent in bits per unit time.
    pub fn lambda_max_bits(&self) -> f64 {
        self.lambda_max / std::f64::consts::LN_2
    }
}

const PERTURBATION: f64 = 1e-8;

/// Benettin's method: follow a reference and a perturbed trajectory,
/// renormalize their separation every `renorm_interval`, and average the
/// logarithmic stretch rates.
pub fn largest_lyapunov<F: VectorField + ?Sized>(
    field: &F,
    opts: &LyapunovOptions,
) -> Result<LyapunovEstimate> {
    let LyapunovOptions {
        dt,
        total_time,
        renorm_interval,
        transient_time,
        seed,
    } = *opts;
    if !(dt > 0.0) || !(renorm_interval >= dt) || !(total_time >= renorm_interval) {
        return Err(Error::Domain(format!(
            "need 0 < dt <= renorm_interval <= total_time, got {dt}, {renorm_interval}, {total_time}"
        )));
    }
    let dim = field.dim();
    let mut x = random_initial(dim, seed);
    let transient_steps = (transient_time / dt).round() as usize;
    let mut t = if transient_steps > 0 {
        advance(field, &mut x, 0.0, dt, transient_steps, |_, _, _| {})?
    } else {
        0.0
    };
    let per_block = ((renorm_interval / dt).round() as usize).max(1);
    let blocks = ((total_time / (per_block as f64 * dt)).round() as usize).max(1);
    let offset = PERTURBATION / (dim as f64).sqrt();
    let mut y: Vec<f64> = x.iter().map(|v| v + offset).collect();
    let mut log_sum = 0.0;
    for _ in 0..blocks {
        let t_next = advance(field, &mut x, t, dt, per_block, |_, _, _| {})?;
        advance(field, &mut y, t, dt, per_block, |_, _, _| {})?;
        t = t_next;
        let dist = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        if !(dist > 0.0 && dist.is_finite()) {
            return Err(Error::Domain(format!(
                "degenerate separation {dist} at t = {t}"
            )));
        }
        log_sum += (dist / PERTURBATION).ln();
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi = xi + (*yi - xi) * PERTURBATION / dist;
        }
    }
    let integration_time = blocks as f64 * per_block as f64 * dt;
    Ok(LyapunovEstimate {
        lambda_max: log_sum / integration_time,
        integration_time,
        renormalization_interval: per_block as f64 * dt,
        dt,
    })
}

/// Time average of the mean pairwise Euclidean distance between nodes.
pub fn pairwise_desync(nodes: &[Trajectory]) -> Result<f64> {
    if nodes.len() < 2 {
        return Err(Error::Contract(
            "need at least two node trajectories".into(),
        ));
    }
    let len = nodes[0].len();
    if len == 0
        || nodes
            .iter()
            .any(|n| n.len() != len || n.n_channels() != nodes[0].n_channels())
    {
        return Err(Error::Contract(
            "node trajectories must be non-empty with equal shapes".into(),
        ));
    }
    let pairs = nodes.len() * (nodes.len() - 1) / 2;
    let mut total = 0.0;
    for t in 0..len {
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                total += nodes[i]
                    .row(t)
                    .iter()
                    .zip(nodes[j].row(t))
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
            }
        }
    }
    Ok(total / (len * pairs) as f64)
}

/// Splits a flat network trajectory into per-node trajectories.
pub fn split_nodes(flat: &Trajectory, n_nodes: usize) -> Result<Vec<Trajectory>> {
    if n_nodes == 0 || !flat.n_channels().is_multiple_of(n_nodes) {
        return Err(Error::Contract(format!(
            "{} channels do not split into {n_nodes} nodes",
            flat.n_channels()
        )));
    }
    let d = flat.n_channels() / n_nodes;
    (0..n_nodes)
        .map(|i| flat.select(&(i * d..(i + 1) * d).collect::<Vec<_>>()))
        .collect()
}
