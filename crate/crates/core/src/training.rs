//! Readout training: regression matrices from teacher-forced runs, the ridge
//! solve, and an exhaustive hyperparameter grid search.

use std::cmp::Ordering;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DatasetSplit, Trajectory};
use crate::error::{Error, Result};
use crate::reservoir::{ReadoutMatrix, Reservoir, ReservoirConfig, ReservoirState};
use crate::seeds;

/// Builds `U` (columns `[b_out; u(k); r(k+1)]`) and `V` (columns `u(k+1)`
/// restricted to the first `n_out` channels) for the `train` steps that
/// follow the washout.
///
/// `states[k]` is the reservoir state after consuming `inputs.row(k)`.
pub fn assemble(
    states: &[ReservoirState],
    inputs: &Trajectory,
    split: DatasetSplit,
    b_out: f64,
    n_out: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if states.len() != inputs.len() {
        return Err(Error::Contract(format!(
            "misaligned run: {} states for {} inputs",
            states.len(),
            inputs.len()
        )));
    }
    let end = split.washout + split.train;
    if inputs.len() <= end {
        return Err(Error::Contract(format!(
            "washout + train = {end} needs at least {} inputs, got {}",
            end + 1,
            inputs.len()
        )));
    }
    if n_out > inputs.n_channels() {
        return Err(Error::Contract(format!(
            "{n_out} outputs requested from {} channels",
            inputs.n_channels()
        )));
    }
    let n_in = inputs.n_channels();
    let n = states[0].r.len();
    let mut u = DMatrix::zeros(1 + n_in + n, split.train);
    let mut v = DMatrix::zeros(n_out, split.train);
    for (col, k) in (split.washout..end).enumerate() {
        write_features(&mut u.column_mut(col), b_out, &states[k]);
        for (c, &x) in inputs.row(k + 1)[..n_out].iter().enumerate() {
            v[(c, col)] = x;
        }
    }
    Ok((u, v))
}

fn write_features<S>(
    col: &mut nalgebra::Matrix<f64, nalgebra::Dyn, nalgebra::U1, S>,
    b_out: f64,
    s: &ReservoirState,
) where
    S: nalgebra::StorageMut<f64, nalgebra::Dyn, nalgebra::U1>,
{
    let n_in = s.last_input.len();
    col[0] = b_out;
    for (i, &x) in s.last_input.iter().enumerate() {
        col[1 + i] = x;
    }
    for (i, &x) in s.r.iter().enumerate() {
        col[1 + n_in + i] = x;
    }
}

const CHUNK: usize = 512;

/// Streaming accumulator for `U Uᵀ`, `V Uᵀ` and `‖V‖²`, so long training
/// runs never materialize `U`.
#[derive(Debug, Clone)]
pub struct NormalEquations {
    gram: DMatrix<f64>,
    cross: DMatrix<f64>,
    target_sq: f64,
    count: usize,
    u_chunk: DMatrix<f64>,
    v_chunk: DMatrix<f64>,
    filled: usize,
}

impl NormalEquations {
    pub fn new(feature_len: usize, n_out: usize) -> Self {
        NormalEquations {
            gram: DMatrix::zeros(feature_len, feature_len),
            cross: DMatrix::zeros(n_out, feature_len),
            target_sq: 0.0,
            count: 0,
            u_chunk: DMatrix::zeros(feature_len, CHUNK),
            v_chunk: DMatrix::zeros(n_out, CHUNK),
            filled: 0,
        }
    }

    pub fn from_matrices(u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<Self> {
        if u.ncols() != v.ncols() {
            return Err(Error::Contract(format!(
                "U has {} columns, V has {}",
                u.ncols(),
                v.ncols()
            )));
        }
        Ok(NormalEquations {
            gram: u * u.transpose(),
            cross: v * u.transpose(),
            target_sq: v.norm_squared(),
            count: u.ncols(),
            u_chunk: DMatrix::zeros(u.nrows(), 0),
            v_chunk: DMatrix::zeros(v.nrows(), 0),
            filled: 0,
        })
    }

    /// Adds the column `[b_out; u(k); r(k+1)]` with target `u(k+1)`.
    pub fn push(&mut self, b_out: f64, state: &ReservoirState, target: &[f64]) {
        let col = self.filled;
        write_features(&mut self.u_chunk.column_mut(col), b_out, state);
        for (c, &x) in target.iter().enumerate() {
            self.v_chunk[(c, col)] = x;
        }
        self.filled += 1;
        if self.filled == self.u_chunk.ncols() {
            self.flush();
        }
    }

    fn flush(&mut self) {
        if self.filled == 0 {
            return;
        }
        let u = self.u_chunk.columns(0, self.filled);
        let v = self.v_chunk.columns(0, self.filled);
        self.gram.gemm(1.0, &u, &u.transpose(), 1.0);
        self.cross.gemm(1.0, &v, &u.transpose(), 1.0);
        self.target_sq += v.norm_squared();
        self.count += self.filled;
        self.filled = 0;
    }

    pub fn count(&self) -> usize {
        self.count + self.filled
    }

    /// Solves `(U Uᵀ + λI) X = U Vᵀ` and returns `W_out = Xᵀ`, together with
    /// the root-mean-square one-step residual over all training entries.
    pub fn solve(&mut self, lambda: f64) -> Result<(DMatrix<f64>, f64)> {
        self.flush();
        if !(lambda >= 0.0) {
            return Err(Error::Domain(format!(
                "ridge parameter must be >= 0, got {lambda}"
            )));
        }
        if self.count == 0 {
            return Err(Error::Contract("no training columns".into()));
        }
        let f = self.gram.nrows();
        let mut system = self.gram.clone();
        for i in 0..f {
            system[(i, i)] += lambda;
        }
        let rhs = self.cross.transpose();
        let x = match system.clone().cholesky() {
            Some(chol) => {
                if lambda == 0.0 {
                    let diag = chol.l_dirty().diagonal();
                    let max = diag.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                    let min = diag.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
                    if min * min <= f64::EPSILON * f as f64 * max * max {
                        return Err(singular());
                    }
                }
                chol.solve(&rhs)
            }
            None if lambda == 0.0 => return Err(singular()),
            // Roundoff can push a barely regularized Gram matrix off the
            // positive-definite cone; pivoted LU still solves it.
            None => system.lu().solve(&rhs).ok_or_else(singular)?,
        };
        if x.iter().any(|v| !v.is_finite()) {
            return Err(singular());
        }
        let w_out = x.transpose();
        // ‖V - W U‖² = ‖V‖² - 2 tr(W U Vᵀ) + tr(W U Uᵀ Wᵀ)
        let wg = &w_out * &self.gram;
        let quad: f64 = wg.component_mul(&w_out).sum();
        let lin: f64 = w_out.component_mul(&self.cross).sum();
        let sse = (self.target_sq - 2.0 * lin + quad).max(0.0);
        let rmse = (sse / (self.count * w_out.nrows()) as f64).sqrt();
        Ok((w_out, rmse))
    }
}

fn singular() -> Error {
    Error::Singular("U Uᵀ + λI is not invertible; use lambda > 0".into())
}

/// Exact ridge optimum `W_out = V Uᵀ (U Uᵀ + λI)⁻¹`, via a symmetric solve.
pub fn ridge_solve(u: &DMatrix<f64>, v: &DMatrix<f64>, lambda: f64) -> Result<DMatrix<f64>> {
    Ok(NormalEquations::from_matrices(u, v)?.solve(lambda)?.0)
}

/// A reservoir with its trained readout.
#[derive(Debug, Clone)]
pub struct TrainedReservoir {
    pub reservoir: Reservoir,
    pub readout: ReadoutMatrix,
    /// Root-mean-square one-step error over the training columns.
    pub train_rmse: f64,
}

impl TrainedReservoir {
    pub fn config(&self) -> &ReservoirConfig {
        &self.reservoir.config
    }
}

/// End-to-end training on a normalized series: build the reservoir from
/// `config.seed`, teacher-force from a random state, discard the washout,
/// and fit the readout on the next `split.train` steps.
///
/// The first `config.n_out` channels are the predicted outputs; any further
/// channels are input-only.
pub fn train(
    data: &Trajectory,
    config: &ReservoirConfig,
    split: DatasetSplit,
) -> Result<TrainedReservoir> {
    let reservoir = Reservoir::build(config)?;
    train_with(reservoir, data, split)
}

/// [`train`] for an already constructed reservoir.
pub fn train_with(
    reservoir: Reservoir,
    data: &Trajectory,
    split: DatasetSplit,
) -> Result<TrainedReservoir> {
    let config = reservoir.config.clone();
    if data.n_channels() != config.n_in {
        return Err(Error::Contract(format!(
            "training data has {} channels, reservoir expects {}",
            data.n_channels(),
            config.n_in
        )));
    }
    let end = split.washout + split.train;
    if data.len() <= end {
        return Err(Error::Contract(format!(
            "washout + train = {end} needs at least {} rows, got {}",
            end + 1,
            data.len()
        )));
    }
    let r0 = ReservoirState::random(
        config.n,
        config.n_in,
        seeds::derive(config.seed, "r0-train"),
    );
    let mut normal = NormalEquations::new(config.feature_len(), config.n_out);
    let inputs = (0..end).map(|k| data.row(k));
    reservoir.drive(inputs, r0, |k, state| {
        if k >= split.washout {
            normal.push(config.b_out, state, &data.row(k + 1)[..config.n_out]);
        }
    })?;
    let (w_out, train_rmse) = normal.solve(config.lambda)?;
    let trained_on = format!(
        "{} rows (washout {}, train {})",
        data.len(),
        split.washout,
        split.train
    );
    let readout = ReadoutMatrix::new(w_out, config.b_out, trained_on)?;
    Ok(TrainedReservoir {
        reservoir,
        readout,
        train_rmse,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Mean synchronization error of the unmeasured channels; lower is better.
    DrivenSyncError,
    /// Valid prediction time of a closed-loop run; higher is better.
    AutonomousHorizon,
}

impl Objective {
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Objective::DrivenSyncError => a < b,
            Objective::AutonomousHorizon => a > b,
        }
    }
}

/// Candidate lists for the swept hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub p: Vec<f64>,
    pub eta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub sigma: Vec<f64>,
    pub lambda: Vec<f64>,
    pub objective: Objective,
    pub n_seeds: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let lists = [&self.p, &self.eta, &self.alpha, &self.sigma, &self.lambda];
        if lists.iter().any(|l| l.is_empty()) {
            return Err(Error::Config("every grid list must be non-empty".into()));
        }
        if self.n_seeds == 0 {
            return Err(Error::Config("n_seeds must be >= 1".into()));
        }
        Ok(())
    }

    /// Cartesian product in `(p, eta, alpha, sigma, lambda)` nesting order.
    pub fn candidates(&self) -> Vec<[f64; 5]> {
        let mut out = Vec::new();
        for &p in &self.p {
            for &eta in &self.eta {
                for &alpha in &self.alpha {
                    for &sigma in &self.sigma {
                        for &lambda in &self.lambda {
                            out.push([p, eta, alpha, sigma, lambda]);
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub p: f64,
    pub eta: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub seed_count: usize,
    /// Median objective over seeds; non-finite when the candidate failed.
    pub score: f64,
}

impl ScoreRow {
    fn tuple(&self) -> [f64; 5] {
        [self.p, self.eta, self.alpha, self.sigma, self.lambda]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub objective: Objective,
    pub rows: Vec<ScoreRow>,
}

impl ScoreTable {
    pub const HEADER: &'static str = "p,eta,alpha,sigma,lambda,seed_count,score";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.p,
                r.eta,
                r.alpha,
                r.sigma,
                r.lambda,
                r.seed_count,
                crate::harness::fmt_value(r.score)
            );
        }
        s
    }

    /// Best row by the objective; ties go to the lexicographically smallest
    /// candidate tuple.
    pub fn best(&self) -> Option<&ScoreRow> {
        self.rows
            .iter()
            .filter(|r| r.score.is_finite())
            .min_by(|a, b| {
                if self.objective.better(a.score, b.score) {
                    Ordering::Less
                } else if self.objective.better(b.score, a.score) {
                    Ordering::Greater
                } else {
                    lexicographic(&a.tuple(), &b.tuple())
                }
            })
    }
}

fn lexicographic(a: &[f64; 5], b: &[f64; 5]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

/// Exhaustive sweep. Each candidate is scored by the median of
/// `evaluate(config)` over `grid.n_seeds` configs whose seeds derive from
/// `base.seed`; a candidate with any failing or non-finite seed scores NaN.
pub fn grid_search<E>(
    grid: &GridSpec,
    base: &ReservoirConfig,
    evaluate: E,
) -> Result<(ReservoirConfig, ScoreTable)>
where
    E: Fn(&ReservoirConfig) -> Result<f64> + Sync,
{
    grid.validate()?;
    let candidates = grid.candidates();
    let configure = |c: &[f64; 5], seed_index: usize| ReservoirConfig {
        p: c[0],
        eta: c[1],
        alpha: c[2],
        sigma: c[3],
        lambda: c[4],
        seed: seeds::derive(base.seed, &format!("grid/{seed_index}")),
        ..base.clone()
    };
    let jobs: Vec<(usize, usize)> = (0..candidates.len())
        .flat_map(|ci| (0..grid.n_seeds).map(move |s| (ci, s)))
        .collect();
    let results: Vec<f64> = jobs
        .par_iter()
        .map(|&(ci, s)| match evaluate(&configure(&candidates[ci], s)) {
            Ok(v) if v.is_finite() => v,
            _ => f64::NAN,
        })
        .collect();

    let rows = candidates
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            let mut scores = results[ci * grid.n_seeds..(ci + 1) * grid.n_seeds].to_vec();
            let score = if scores.iter().all(|v| v.is_finite()) {
                median(&mut scores)
            } else {
                f64::NAN
            };
            ScoreRow {
                p: c[0],
                eta: c[1],
                alpha: c[2],
                sigma: c[3],
                lambda: c[4],
                seed_count: grid.n_seeds,
                score,
            }
        })
        .collect();
    let table = ScoreTable {
        objective: grid.objective,
        rows,
    };
    match table.best() {
        Some(best) => {
            let cfg = ReservoirConfig {
                seed: base.seed,
                ..configure(&best.tuple(), 0)
            };
            Ok((cfg, table))
        }
        None => Err(Error::GridExhausted { table }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    /// Brute-force oracle: explicit inverse of the regularized Gram matrix.
    fn oracle(u: &DMatrix<f64>, v: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
        let g = u * u.transpose() + DMatrix::identity(u.nrows(), u.nrows()) * lambda;
        v * u.transpose() * g.try_inverse().unwrap()
    }

    fn objective(u: &DMatrix<f64>, v: &DMatrix<f64>, w: &DMatrix<f64>, lambda: f64) -> f64 {
        (v - w * u).norm_squared() + lambda * w.norm_squared()
    }

    #[test]
    fn recovers_exact_linear_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_matrix(12, 80, &mut rng);
        let m = random_matrix(3, 12, &mut rng);
        let w = ridge_solve(&u, &(&m * &u), 0.0).unwrap();
        assert!((w - m).abs().max() < 1e-8);
    }

    #[test]
    fn matches_explicit_inverse_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for trial in 0..20 {
            let u = random_matrix(8, 20, &mut rng);
            let v = random_matrix(2, 20, &mut rng);
            let lambda = [0.0, 1e-6, 0.1, 3.0][trial % 4];
            let got = ridge_solve(&u, &v, lambda).unwrap();
            let want = oracle(&u, &v, lambda);
            assert!((got - want).abs().max() < 1e-9, "trial {trial}");
        }
    }

    #[test]
    fn shrinks_with_lambda() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_matrix(10, 40, &mut rng);
        let v = random_matrix(3, 40, &mut rng);
        let norms: Vec<f64> = [1e-10, 1e-3, 1.0, 10.0, 1e3, 1e9]
            .iter()
            .map(|&l| ridge_solve(&u, &v, l).unwrap().norm())
            .collect();
        assert!(norms.windows(2).all(|w| w[0] >= w[1]), "{norms:?}");
        assert!(norms[5] < 1e-3 * norms[0]);
    }

    #[test]
    fn perturbation_increases_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_matrix(6, 30, &mut rng);
        let v = random_matrix(2, 30, &mut rng);
        let lambda = 0.05;
        let w = ridge_solve(&u, &v, lambda).unwrap();
        let best = objective(&u, &v, &w, lambda);
        for i in 0..w.nrows() {
            for j in 0..w.ncols() {
                for d in [1e-3, -1e-3] {
                    let mut p = w.clone();
                    p[(i, j)] += d;
                    assert!(objective(&u, &v, &p, lambda) > best);
                }
            }
        }
    }

    #[test]
    fn rank_deficient_without_ridge_is_singular() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut u = random_matrix(5, 30, &mut rng);
        let dup = u.row(0).clone_owned();
        u.set_row(4, &dup);
        let v = random_matrix(1, 30, &mut rng);
        assert!(matches!(ridge_solve(&u, &v, 0.0), Err(Error::Singular(_))));
        assert!(ridge_solve(&u, &v, 1e-3).is_ok());
    }

    #[test]
    fn streaming_matches_batch() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 7;
        let states: Vec<ReservoirState> = (0..1300)
            .map(|_| ReservoirState {
                r: (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
                last_input: (0..2).map(|_| rng.random_range(-1.0..1.0)).collect(),
            })
            .collect();
        let targets: Vec<[f64; 2]> = (0..1300).map(|_| [rng.random(), rng.random()]).collect();
        let mut stream = NormalEquations::new(1 + 2 + n, 2);
        let mut u = DMatrix::zeros(1 + 2 + n, 1300);
        let mut v = DMatrix::zeros(2, 1300);
        for (k, (s, t)) in states.iter().zip(&targets).enumerate() {
            stream.push(1.0, s, t);
            write_features(&mut u.column_mut(k), 1.0, s);
            v[(0, k)] = t[0];
            v[(1, k)] = t[1];
        }
        let (w, rmse) = stream.solve(1e-4).unwrap();
        let batch = ridge_solve(&u, &v, 1e-4).unwrap();
        assert!((&w - &batch).abs().max() < 1e-10);
        let direct = ((&v - &batch * &u).norm_squared() / (2.0 * 1300.0)).sqrt();
        assert!((rmse - direct).abs() < 1e-9, "{rmse} vs {direct}");
    }

    fn toy_states(len: usize, n_in: usize, n: usize) -> (Vec<ReservoirState>, Trajectory) {
        let rows: Vec<f64> = (0..len * n_in).map(|i| (i as f64 * 0.37).sin()).collect();
        let traj = Trajectory::from_rows(0.1, 0.0, n_in, rows).unwrap();
        let states = (0..len)
            .map(|k| ReservoirState {
                r: vec![k as f64; n],
                last_input: traj.row(k).to_vec(),
            })
            .collect();
        (states, traj)
    }

    #[test]
    fn assemble_layout() {
        let (states, traj) = toy_states(10, 3, 4);
        let split = DatasetSplit {
            washout: 2,
            train: 1,
            test: 5,
        };
        let (u, v) = assemble(&states, &traj, split, 1.0, 3).unwrap();
        assert_eq!(u.shape(), (8, 1));
        assert_eq!(u[(0, 0)], 1.0);
        assert_eq!(&u.column(0).as_slice()[1..4], traj.row(2));
        assert_eq!(u[(4, 0)], 2.0);
        assert_eq!(v.column(0).as_slice(), traj.row(3));
    }

    #[test]
    fn assemble_constant_targets_and_errors() {
        let traj = Trajectory::from_rows(0.1, 0.0, 2, [0.25, -0.5].repeat(20)).unwrap();
        let states: Vec<ReservoirState> = (0..20)
            .map(|_| ReservoirState {
                r: vec![0.0; 3],
                last_input: vec![0.25, -0.5],
            })
            .collect();
        let split = DatasetSplit {
            washout: 3,
            train: 10,
            test: 2,
        };
        let (_, v) = assemble(&states, &traj, split, 1.0, 2).unwrap();
        assert!(v.column_iter().all(|c| c.as_slice() == [0.25, -0.5]));

        let err = assemble(&states[..19], &traj, split, 1.0, 2).unwrap_err();
        assert!(err.to_string().contains("19") && err.to_string().contains("20"));
        let long = DatasetSplit {
            washout: 10,
            train: 10,
            test: 1,
        };
        assert!(assemble(&states, &traj, long, 1.0, 2).is_err());
    }

    #[test]
    fn assemble_full_size_shapes() {
        let (states, traj) = toy_states(3001, 3, 500);
        let split = DatasetSplit {
            washout: 400,
            train: 2600,
            test: 1,
        };
        let (u, v) = assemble(&states, &traj, split, 1.0, 3).unwrap();
        assert_eq!(u.shape(), (504, 2600));
        assert_eq!(v.shape(), (3, 2600));
    }

    fn toy_grid(objective: Objective, n_seeds: usize) -> GridSpec {
        GridSpec {
            p: vec![0.1, 0.2],
            eta: vec![0.5, 0.9],
            alpha: vec![1.0],
            sigma: vec![1.0],
            lambda: vec![1e-6],
            objective,
            n_seeds,
        }
    }

    #[test]
    fn grid_single_candidate() {
        let grid = GridSpec {
            p: vec![0.3],
            eta: vec![0.8],
            alpha: vec![0.5],
            sigma: vec![0.2],
            lambda: vec![1e-8],
            objective: Objective::DrivenSyncError,
            n_seeds: 2,
        };
        let base = ReservoirConfig::from_tuple((10, 0.1, 0.1, 0.1, 0.1, 0.1), 3);
        let (best, table) = grid_search(&grid, &base, |_| Ok(1.0)).unwrap();
        assert_eq!(
            (best.p, best.eta, best.alpha, best.sigma, best.lambda),
            (0.3, 0.8, 0.5, 0.2, 1e-8)
        );
        assert_eq!(table.rows.len(), 1);
    }

    #[test]
    fn grid_picks_best_and_breaks_ties_lexicographically() {
        let base = ReservoirConfig::from_tuple((10, 0.1, 0.1, 0.1, 0.1, 0.1), 3);
        let (best, _) = grid_search(&toy_grid(Objective::DrivenSyncError, 1), &base, |c| {
            Ok(c.eta)
        })
        .unwrap();
        assert_eq!((best.p, best.eta), (0.1, 0.5));
        let (best, _) = grid_search(&toy_grid(Objective::AutonomousHorizon, 1), &base, |c| {
            Ok(c.p + c.eta)
        })
        .unwrap();
        assert_eq!((best.p, best.eta), (0.2, 0.9));
    }

    #[test]
    fn grid_schema_is_seed_independent() {
        let base = ReservoirConfig::from_tuple((10, 0.1, 0.1, 0.1, 0.1, 0.1), 3);
        let eval = |c: &ReservoirConfig| Ok((c.seed % 97) as f64);
        let (_, one) = grid_search(&toy_grid(Objective::DrivenSyncError, 1), &base, eval).unwrap();
        let (_, five) = grid_search(&toy_grid(Objective::DrivenSyncError, 5), &base, eval).unwrap();
        let header = |t: &ScoreTable| t.to_csv().lines().next().unwrap().to_string();
        assert_eq!(header(&one), header(&five));
        assert_eq!(one.rows.len(), five.rows.len());
        assert!(five.rows.iter().all(|r| r.seed_count == 5));
    }

    #[test]
    fn grid_all_failed() {
        let base = ReservoirConfig::from_tuple((10, 0.1, 0.1, 0.1, 0.1, 0.1), 3);
        let err = grid_search(&toy_grid(Objective::DrivenSyncError, 2), &base, |_| {
            Err(Error::Divergence {
                step: 1,
                magnitude: 1e9,
            })
        })
        .unwrap_err();
        match err {
            Error::GridExhausted { table } => assert_eq!(table.rows.len(), 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
