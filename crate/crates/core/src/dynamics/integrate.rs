use super::system::VectorField;
use super::trajectory::Trajectory;
use crate::error::{Error, Result};

/// Any state component beyond this magnitude is treated as a blow-up.
pub const DIVERGENCE_BOUND: f64 = 1e8;

/// Classical fourth-order Runge-Kutta stepper with reusable stage buffers.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Rk4 {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    /// Advances `state` in place from `t` to `t + dt`.
    pub fn step<F: VectorField + ?Sized>(
        &mut self,
        field: &F,
        t: f64,
        dt: f64,
        state: &mut [f64],
    ) -> Result<()> {
        let half = 0.5 * dt;
        field.eval(t, state, &mut self.k1);
        check_stage(&self.k1, "k1", t)?;
        for ((tmp, x), k) in self.tmp.iter_mut().zip(state.iter()).zip(&self.k1) {
            *tmp = x + half * k;
        }
        field.eval(t + half, &self.tmp, &mut self.k2);
        check_stage(&self.k2, "k2", t)?;
        for ((tmp, x), k) in self.tmp.iter_mut().zip(state.iter()).zip(&self.k2) {
            *tmp = x + half * k;
        }
        field.eval(t + half, &self.tmp, &mut self.k3);
        check_stage(&self.k3, "k3", t)?;
        for ((tmp, x), k) in self.tmp.iter_mut().zip(state.iter()).zip(&self.k3) {
            *tmp = x + dt * k;
        }
        field.eval(t + dt, &self.tmp, &mut self.k4);
        check_stage(&self.k4, "k4", t)?;
        let sixth = dt / 6.0;
        for i in 0..state.len() {
            state[i] += sixth * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        Ok(())
    }
}

fn check_stage(k: &[f64], stage: &str, t: f64) -> Result<()> {
    if k.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "RK4 stage {stage} is non-finite at t = {t}"
        )))
    }
}

fn check_state(state: &[f64], dim: usize) -> Result<()> {
    if state.len() != dim {
        return Err(Error::Contract(format!(
            "state has dimension {}, field expects {dim}",
            state.len()
        )));
    }
    if state.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite state {state:?}")));
    }
    Ok(())
}

/// One RK4 step of `field` from `(t, state)`.
pub fn rk4_step<F: VectorField + ?Sized>(
    field: &F,
    state: &[f64],
    t: f64,
    dt: f64,
) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!(
            "time step must be positive, got {dt}"
        )));
    }
    check_state(state, field.dim())?;
    let mut next = state.to_vec();
    Rk4::new(state.len()).step(field, t, dt, &mut next)?;
    Ok(next)
}

/// Streams `n_steps` RK4 steps, calling `visit(step_index, t, state)` after
/// each one (index starts at 1). Rejects any component beyond
/// [`DIVERGENCE_BOUND`].
pub(crate) fn advance<F, V>(
    field: &F,
    state: &mut [f64],
    t0: f64,
    dt: f64,
    n_steps: usize,
    mut visit: V,
) -> Result<f64>
where
    F: VectorField + ?Sized,
    V: FnMut(usize, f64, &[f64]),
{
    let mut rk = Rk4::new(state.len());
    let mut t = t0;
    for n in 1..=n_steps {
        rk.step(field, t, dt, state)?;
        // Recompute from the step count rather than accumulating dt.
        t = t0 + n as f64 * dt;
        let magnitude = state.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if !(magnitude <= DIVERGENCE_BOUND) {
            return Err(Error::Divergence { step: n, magnitude });
        }
        visit(n, t, state);
    }
    Ok(t)
}

/// Integrates `n_steps` steps and returns all `n_steps + 1` samples, unscaled.
pub fn integrate<F: VectorField + ?Sized>(
    field: &F,
    initial: &[f64],
    t0: f64,
    dt: f64,
    n_steps: usize,
) -> Result<Trajectory> {
    if n_steps == 0 {
        return Err(Error::Contract("integrate needs n_steps >= 1".into()));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!(
            "time step must be positive, got {dt}"
        )));
    }
    check_state(initial, field.dim())?;
    let dim = initial.len();
    let mut data = Vec::with_capacity((n_steps + 1) * dim);
    data.extend_from_slice(initial);
    let mut state = initial.to_vec();
    advance(field, &mut state, t0, dt, n_steps, |_, _, s| {
        data.extend_from_slice(s)
    })?;
    Trajectory::from_rows(dt, t0, dim, data)
}
