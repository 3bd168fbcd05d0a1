//! Echo state network: fixed random input and recurrent weights, the
//! leaky-tanh state update, and the linear readout over
//! `[b_out; u(n-1); r(n)]`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;

/// Hyperparameters of one reservoir.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservoirConfig {
    /// Number of reservoir nodes.
    pub n: usize,
    /// Connection probability of the recurrent matrix.
    pub p: f64,
    /// Target spectral radius.
    pub eta: f64,
    /// Leaking rate in `(0, 1]`.
    pub alpha: f64,
    /// Input weights are drawn from `[-sigma, sigma]`.
    pub sigma: f64,
    /// Ridge parameter.
    pub lambda: f64,
    #[serde(default = "unit")]
    pub b_in: f64,
    #[serde(default = "unit")]
    pub b_out: f64,
    pub n_in: usize,
    pub n_out: usize,
    #[serde(default)]
    pub seed: u64,
}

fn unit() -> f64 {
    1.0
}

impl ReservoirConfig {
    /// Builds a config from the `(N, p, eta, alpha, sigma, lambda)` tuple with
    /// unit biases, `n_in = n_out = dim`, and seed 0.
    pub fn from_tuple(tuple: (usize, f64, f64, f64, f64, f64), dim: usize) -> Self {
        let (n, p, eta, alpha, sigma, lambda) = tuple;
        ReservoirConfig {
            n,
            p,
            eta,
            alpha,
            sigma,
            lambda,
            b_in: 1.0,
            b_out: 1.0,
            n_in: dim,
            n_out: dim,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Width of the readout feature vector `[b_out; u; r]`.
    pub fn feature_len(&self) -> usize {
        1 + self.n_in + self.n
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.p,
            self.eta,
            self.alpha,
            self.sigma,
            self.lambda,
            self.b_in,
            self.b_out,
        ]
        .iter()
        .all(|v| v.is_finite());
        let problem = if !finite {
            Some("non-finite hyperparameter".to_string())
        } else if self.n == 0 {
            Some("N must be >= 1".into())
        } else if !(self.p > 0.0 && self.p <= 1.0) {
            Some(format!("p = {} not in (0, 1]", self.p))
        } else if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            Some(format!("alpha = {} not in (0, 1]", self.alpha))
        } else if !(self.sigma > 0.0) {
            Some(format!("sigma = {} must be > 0", self.sigma))
        } else if !(self.eta > 0.0) {
            Some(format!("eta = {} must be > 0", self.eta))
        } else if !(self.lambda >= 0.0) {
            Some(format!("lambda = {} must be >= 0", self.lambda))
        } else if self.n_in == 0 || self.n_out == 0 || self.n_out > self.n_in {
            Some(format!(
                "need 1 <= n_out <= n_in, got {} / {}",
                self.n_out, self.n_in
            ))
        } else {
            None
        };
        match problem {
            Some(msg) => Err(Error::Domain(format!("invalid reservoir config: {msg}"))),
            None => Ok(()),
        }
    }
}

/// Compressed sparse row matrix, enough for `y = A x`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut row_ptr = Vec::with_capacity(m.nrows() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(values.len());
        }
        CsrMatrix {
            n_rows: m.nrows(),
            n_cols: m.ncols(),
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.col_idx[k])] = self.values[k];
            }
        }
        m
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    pub fn mul_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            *o = self.col_idx[lo..hi]
                .iter()
                .zip(&self.values[lo..hi])
                .map(|(&j, v)| v * x[j])
                .sum();
        }
    }

    fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
    }
}

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 100_000;
const MAX_BUILD_ATTEMPTS: u64 = 4;

/// Spectral radius of a matrix with nonnegative entries.
///
/// Power iteration runs on `A + I`: for nonnegative `A` its dominant
/// eigenvalue is `rho(A) + 1` and is strictly dominant in modulus, so the
/// iteration converges even when `A` is periodic. Returns `None` if the
/// estimate does not settle within the iteration budget.
pub fn nonnegative_spectral_radius(a: &CsrMatrix) -> Option<f64> {
    let n = a.n_rows;
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut prev = f64::NAN;
    for _ in 0..POWER_MAX_ITER {
        a.mul_into(&x, &mut y);
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi += xi;
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
        if (norm - prev).abs() <= POWER_TOL * norm {
            return Some(norm - 1.0);
        }
        prev = norm;
    }
    None
}

/// The fixed random matrices of a reservoir.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirWeights {
    /// `N x (n_in + 1)`; column 0 multiplies the input bias.
    pub w_in: DMatrix<f64>,
    pub a: CsrMatrix,
}

impl ReservoirWeights {
    pub fn from_dense(w_in: DMatrix<f64>, a: &DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() || a.nrows() != w_in.nrows() {
            return Err(Error::Contract(format!(
                "incompatible shapes: w_in {:?}, a {:?}",
                w_in.shape(),
                a.shape()
            )));
        }
        Ok(ReservoirWeights {
            w_in,
            a: CsrMatrix::from_dense(a),
        })
    }
}

/// Reservoir node values `r(n)` plus the input `u(n-1)` that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirState {
    pub r: Vec<f64>,
    pub last_input: Vec<f64>,
}

impl ReservoirState {
    pub fn zeros(n: usize, n_in: usize) -> Self {
        ReservoirState {
            r: vec![0.0; n],
            last_input: vec![0.0; n_in],
        }
    }

    /// Node values uniform in `(-1, 1)`, previous input zero.
    pub fn random(n: usize, n_in: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ReservoirState {
            r: (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
            last_input: vec![0.0; n_in],
        }
    }
}

/// A constructed reservoir: configuration plus fixed weights.
#[derive(Debug, Clone)]
pub struct Reservoir {
    pub config: ReservoirConfig,
    pub weights: ReservoirWeights,
}

impl Reservoir {
    /// Draws `w_in` and `a` from `config.seed` and rescales `a` so its
    /// spectral radius is exactly `eta`. If the eigenvalue iteration fails to
    /// settle, the matrix is redrawn from a derived seed.
    pub fn build(config: &ReservoirConfig) -> Result<Self> {
        config.validate()?;
        let mut last_err = None;
        for attempt in 0..MAX_BUILD_ATTEMPTS {
            let seed = if attempt == 0 {
                config.seed
            } else {
                seeds::derive(config.seed, &format!("reseed-{attempt}"))
            };
            match build_once(config, seed) {
                Ok(weights) => {
                    return Ok(Reservoir {
                        config: config.clone(),
                        weights,
                    })
                }
                Err(e @ Error::Construction(_)) if attempt + 1 < MAX_BUILD_ATTEMPTS => {
                    last_err = Some(e)
                }
                Err(e) => return Err(e),
            }
        }
        Err(last_err.unwrap_or_else(|| Error::Construction("no attempts".into())))
    }

    pub fn from_parts(config: ReservoirConfig, weights: ReservoirWeights) -> Result<Self> {
        config.validate()?;
        let (rows, cols) = weights.w_in.shape();
        if rows != config.n || cols != config.n_in + 1 || weights.a.shape() != (config.n, config.n)
        {
            return Err(Error::Contract(format!(
                "weights w_in {:?}, a {:?} do not match N = {}, n_in = {}",
                weights.w_in.shape(),
                weights.a.shape(),
                config.n,
                config.n_in
            )));
        }
        Ok(Reservoir { config, weights })
    }

    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn n_in(&self) -> usize {
        self.config.n_in
    }

    /// `r' = (1 - alpha) r + alpha tanh(A r + W_in [b_in; u])`.
    pub fn step(&self, state: &ReservoirState, u: &[f64]) -> Result<ReservoirState> {
        let mut next = state.clone();
        let mut scratch = vec![0.0; self.n()];
        self.step_mut(&mut next, u, &mut scratch)?;
        Ok(next)
    }

    /// In-place [`Reservoir::step`]; `scratch` must have length `N`.
    pub fn step_mut(
        &self,
        state: &mut ReservoirState,
        u: &[f64],
        scratch: &mut [f64],
    ) -> Result<()> {
        if u.len() != self.n_in() || state.r.len() != self.n() {
            return Err(Error::Contract(format!(
                "step expects input of length {} and state of length {}, got {} / {}",
                self.n_in(),
                self.n(),
                u.len(),
                state.r.len()
            )));
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite reservoir input {u:?}")));
        }
        let w_in = &self.weights.w_in;
        self.weights.a.mul_into(&state.r, scratch);
        let bias = w_in.column(0);
        for (s, w) in scratch.iter_mut().zip(bias.iter()) {
            *s += w * self.config.b_in;
        }
        for (k, &uk) in u.iter().enumerate() {
            for (s, w) in scratch.iter_mut().zip(w_in.column(k + 1).iter()) {
                *s += w * uk;
            }
        }
        let alpha = self.config.alpha;
        for (r, s) in state.r.iter_mut().zip(scratch.iter()) {
            *r = (1.0 - alpha) * *r + alpha * s.tanh();
        }
        state.last_input.copy_from_slice(u);
        Ok(())
    }

    /// Open-loop run: applies [`Reservoir::step`] with each row of `inputs`
    /// in turn and returns every state (the caller discards the washout).
    pub fn run_teacher_forced<'a, I>(
        &self,
        inputs: I,
        r0: ReservoirState,
    ) -> Result<Vec<ReservoirState>>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut states = Vec::new();
        self.drive(inputs, r0, |_, s| states.push(s.clone()))?;
        Ok(states)
    }

    /// Streaming form of [`Reservoir::run_teacher_forced`]: calls
    /// `visit(k, state)` after consuming input row `k`; returns the final state.
    pub fn drive<'a, I, V>(
        &self,
        inputs: I,
        r0: ReservoirState,
        mut visit: V,
    ) -> Result<ReservoirState>
    where
        I: IntoIterator<Item = &'a [f64]>,
        V: FnMut(usize, &ReservoirState),
    {
        let mut state = r0;
        let mut scratch = vec![0.0; self.n()];
        for (k, u) in inputs.into_iter().enumerate() {
            self.step_mut(&mut state, u, &mut scratch)?;
            visit(k, &state);
        }
        Ok(state)
    }
}

fn build_once(config: &ReservoirConfig, seed: u64) -> Result<ReservoirWeights> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = config.n;
    let sigma = config.sigma;
    let w_in = DMatrix::from_fn(n, config.n_in + 1, |_, _| rng.random_range(-sigma..=sigma));

    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    row_ptr.push(0);
    for _ in 0..n {
        for j in 0..n {
            if rng.random::<f64>() < config.p {
                let v: f64 = rng.random();
                if v > 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
        }
        row_ptr.push(values.len());
    }
    let mut a = CsrMatrix {
        n_rows: n,
        n_cols: n,
        row_ptr,
        col_idx,
        values,
    };
    let radius = nonnegative_spectral_radius(&a)
        .ok_or_else(|| Error::Construction("spectral radius iteration did not converge".into()))?;
    if !(radius > 1e-9) {
        return Err(Error::Construction(format!(
            "recurrent matrix has spectral radius {radius:e} ({} nonzeros); reseed",
            a.nnz()
        )));
    }
    a.scale(config.eta / radius);
    Ok(ReservoirWeights { w_in, a })
}

/// Trained linear readout `v = W_out [b_out; u(n-1); r(n)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutMatrix {
    pub w_out: DMatrix<f64>,
    pub b_out: f64,
    /// Free-form provenance (training system and split).
    pub trained_on: String,
}

impl ReadoutMatrix {
    pub fn new(w_out: DMatrix<f64>, b_out: f64, trained_on: impl Into<String>) -> Result<Self> {
        if w_out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("readout has non-finite entries".into()));
        }
        Ok(ReadoutMatrix {
            w_out,
            b_out,
            trained_on: trained_on.into(),
        })
    }

    pub fn zeros(n_out: usize, feature_len: usize) -> Self {
        ReadoutMatrix {
            w_out: DMatrix::zeros(n_out, feature_len),
            b_out: 1.0,
            trained_on: String::new(),
        }
    }

    pub fn n_out(&self) -> usize {
        self.w_out.nrows()
    }

    pub fn readout(&self, state: &ReservoirState) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.n_out()];
        self.readout_into(state, &mut v)?;
        Ok(v)
    }

    pub fn readout_into(&self, state: &ReservoirState, out: &mut [f64]) -> Result<()> {
        let n_in = state.last_input.len();
        if self.w_out.ncols() != 1 + n_in + state.r.len() || out.len() != self.n_out() {
            return Err(Error::Contract(format!(
                "readout is {:?}, state needs {} columns",
                self.w_out.shape(),
                1 + n_in + state.r.len()
            )));
        }
        let w = &self.w_out;
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = w[(i, 0)] * self.b_out;
            for (k, u) in state.last_input.iter().enumerate() {
                acc += w[(i, 1 + k)] * u;
            }
            for (k, r) in state.r.iter().enumerate() {
                acc += w[(i, 1 + n_in + k)] * r;
            }
            *o = acc;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn config(n: usize, p: f64, eta: f64, seed: u64) -> ReservoirConfig {
        ReservoirConfig::from_tuple((n, p, eta, 0.95, 1.0, 1e-10), 3).with_seed(seed)
    }

    /// Independent oracle: all eigenvalues from a dense Schur decomposition.
    fn dense_spectral_radius(a: &DMatrix<f64>) -> f64 {
        a.complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn input_weights_within_sigma() {
        let mut cfg = config(200, 0.2, 0.9, 1);
        cfg.sigma = 0.5;
        let res = Reservoir::build(&cfg).unwrap();
        assert!(res.weights.w_in.iter().all(|w| w.abs() <= 0.5));
        assert_eq!(res.weights.w_in.shape(), (200, 4));
    }

    #[test]
    fn spectral_radius_matches_eta() {
        for (n, p, eta, seed) in [
            (150, 0.25, 0.99, 1),
            (120, 0.05, 0.6, 2),
            (80, 0.5, 0.85, 3),
        ] {
            let res = Reservoir::build(&config(n, p, eta, seed)).unwrap();
            let rho = dense_spectral_radius(&res.weights.a.to_dense());
            assert!((rho - eta).abs() <= 1e-6 * eta, "N={n}: {rho} vs {eta}");
        }
    }

    #[test]
    fn periodic_matrix_radius() {
        // A 3-cycle permutation is periodic; plain power iteration would oscillate.
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 0.0, 0.0, 0.0, 2.0, 2.0, 0.0, 0.0]);
        let rho = nonnegative_spectral_radius(&CsrMatrix::from_dense(&a)).unwrap();
        assert!((rho - 2.0).abs() < 1e-8, "{rho}");
    }

    #[test]
    fn empty_recurrent_matrix_is_construction_error() {
        let cfg = config(1, 1e-9, 0.9, 0);
        assert!(matches!(
            Reservoir::build(&cfg),
            Err(Error::Construction(_))
        ));
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = config(10, 0.2, 0.9, 0);
        cfg.alpha = 0.0;
        assert!(Reservoir::build(&cfg).is_err());
        let mut cfg = config(10, 0.2, 0.9, 0);
        cfg.n_out = 4;
        assert!(Reservoir::build(&cfg).is_err());
    }

    #[test]
    fn build_is_deterministic_per_seed() {
        let a = Reservoir::build(&config(60, 0.3, 0.9, 11)).unwrap();
        let b = Reservoir::build(&config(60, 0.3, 0.9, 11)).unwrap();
        let c = Reservoir::build(&config(60, 0.3, 0.9, 12)).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_ne!(a.weights, c.weights);
    }

    #[test]
    fn zero_weights_give_zero_state() {
        let cfg = ReservoirConfig {
            alpha: 1.0,
            ..config(5, 0.5, 0.9, 0)
        };
        let w = ReservoirWeights::from_dense(DMatrix::zeros(5, 4), &DMatrix::zeros(5, 5)).unwrap();
        let res = Reservoir::from_parts(cfg, w).unwrap();
        let next = res
            .step(&ReservoirState::random(5, 3, 1), &[0.3, -0.2, 0.9])
            .unwrap();
        assert!(next.r.iter().all(|&v| v == 0.0));
        assert_eq!(next.last_input, vec![0.3, -0.2, 0.9]);
    }

    #[test]
    fn step_rejects_bad_input() {
        let res = Reservoir::build(&config(20, 0.3, 0.9, 0)).unwrap();
        let s = ReservoirState::zeros(20, 3);
        assert!(matches!(
            res.step(&s, &[0.0, f64::NAN, 0.0]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(res.step(&s, &[0.0, 0.0]), Err(Error::Contract(_))));
    }

    #[test]
    fn readout_projections() {
        let state = ReservoirState {
            r: vec![0.1, -0.4, 0.7],
            last_input: vec![0.5, 0.25],
        };
        let zero = ReadoutMatrix::zeros(2, 6);
        assert_eq!(zero.readout(&state).unwrap(), vec![0.0, 0.0]);

        let mut w = DMatrix::zeros(2, 6);
        w[(0, 0)] = 1.0;
        w[(1, 0)] = 1.0;
        let bias = ReadoutMatrix::new(w, 1.0, "").unwrap();
        assert_eq!(bias.readout(&state).unwrap(), vec![1.0, 1.0]);

        let mut w = DMatrix::zeros(1, 6);
        w[(0, 3 + 1)] = 1.0;
        let pick = ReadoutMatrix::new(w, 1.0, "").unwrap();
        assert_eq!(pick.readout(&state).unwrap(), vec![-0.4]);

        assert!(matches!(
            ReadoutMatrix::zeros(2, 5).readout(&state),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn teacher_forced_edge_cases() {
        let res = Reservoir::build(&config(50, 0.3, 0.9, 0)).unwrap();
        let states = res
            .run_teacher_forced(std::iter::empty(), ReservoirState::zeros(50, 3))
            .unwrap();
        assert!(states.is_empty());

        let drive: Vec<[f64; 3]> = (0..300)
            .map(|k| [(k as f64 * 0.1).sin(), 0.2, -0.1])
            .collect();
        let run = |seed| {
            res.run_teacher_forced(
                drive.iter().map(|r| r.as_slice()),
                ReservoirState::random(50, 3, seed),
            )
            .unwrap()
        };
        assert_eq!(run(1), run(1));
    }

    #[test]
    fn constant_drive_forgets_initial_state() {
        let cfg = ReservoirConfig {
            alpha: 0.5,
            ..config(100, 0.2, 0.8, 5)
        };
        let res = Reservoir::build(&cfg).unwrap();
        let u = [0.3, -0.5, 0.1];
        let inputs = std::iter::repeat_n(&u[..], 2000);
        let a = res
            .drive(inputs.clone(), ReservoirState::random(100, 3, 1), |_, _| {})
            .unwrap();
        let b = res
            .drive(inputs, ReservoirState::random(100, 3, 2), |_, _| {})
            .unwrap();
        let dist: f64 =
            a.r.iter()
                .zip(&b.r)
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt();
        assert!(dist < 1e-9, "{dist}");
    }

    #[test]
    fn realized_density_is_binomial() {
        // 99% two-sided normal approximation to Binomial(N^2, p).
        let (n, p) = (500usize, 0.25);
        let trials = (n * n) as f64;
        let half_width = 2.576 * (trials * p * (1.0 - p)).sqrt();
        for seed in 0..10 {
            let res = Reservoir::build(&config(n, p, 0.99, seed)).unwrap();
            let nnz = res.weights.a.nnz() as f64;
            assert!((nnz - trials * p).abs() <= half_width, "seed {seed}: {nnz}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn state_stays_in_unit_box(
            seed in 0u64..1000,
            inputs in prop::collection::vec(prop::array::uniform3(-5.0f64..5.0), 1..30),
        ) {
            let res = Reservoir::build(&config(30, 0.3, 0.99, seed)).unwrap();
            let mut state = ReservoirState::random(30, 3, seed);
            for u in &inputs {
                state = res.step(&state, u).unwrap();
                prop_assert!(state.r.iter().all(|v| (-1.0..=1.0).contains(v)));
            }
        }
    }
}
