use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gravitational acceleration used by the pendulum model.
pub const GRAVITY: f64 = 9.8;

/// Something that can be integrated: an explicit, possibly time-dependent,
/// first-order ODE `ẋ = f(t, x)`.
pub trait VectorField {
    fn dim(&self) -> usize;

    /// Writes `f(t, x)` into `out`. Inputs are assumed finite and of length
    /// [`VectorField::dim`]; callers check finiteness of the result.
    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Lorenz,
    Rossler,
    Chen,
    HindmarshRose,
    Pendulum,
}

impl Family {
    pub fn dim(self) -> usize {
        match self {
            Family::Pendulum => 2,
            _ => 3,
        }
    }

    pub fn n_params(self) -> usize {
        match self {
            Family::Lorenz | Family::Rossler | Family::Chen => 3,
            Family::HindmarshRose => 8,
            Family::Pendulum => 7,
        }
    }

    pub fn channel_names(self) -> &'static [&'static str] {
        match self {
            Family::Pendulum => &["theta", "omega"],
            _ => &["x", "y", "z"],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Family::Lorenz => "lorenz",
            Family::Rossler => "rossler",
            Family::Chen => "chen",
            Family::HindmarshRose => "hindmarsh_rose",
            Family::Pendulum => "pendulum",
        };
        f.write_str(name)
    }
}

/// A concrete dynamical system: an ODE family plus its parameter vector.
///
/// Parameter layouts:
///
/// | family           | params                               |
/// |------------------|--------------------------------------|
/// | `Lorenz`         | `a, rho, c`                          |
/// | `Rossler`        | `a, b, c`                            |
/// | `Chen`           | `a, b, c`                            |
/// | `HindmarshRose`  | `a, b, c, d, r, s, x0, I`            |
/// | `Pendulum`       | `J, gamma, k, m, r, M, omega_d`      |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSystemSpec", into = "RawSystemSpec")]
pub struct SystemSpec {
    family: Family,
    params: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSystemSpec {
    family: Family,
    params: Vec<f64>,
}

impl TryFrom<RawSystemSpec> for SystemSpec {
    type Error = Error;

    fn try_from(raw: RawSystemSpec) -> Result<Self> {
        SystemSpec::new(raw.family, raw.params)
    }
}

impl From<SystemSpec> for RawSystemSpec {
    fn from(spec: SystemSpec) -> Self {
        RawSystemSpec {
            family: spec.family,
            params: spec.params,
        }
    }
}

impl SystemSpec {
    pub fn new(family: Family, params: Vec<f64>) -> Result<Self> {
        if params.len() != family.n_params() {
            return Err(Error::Contract(format!(
                "{family} expects {} parameters, got {}",
                family.n_params(),
                params.len()
            )));
        }
        if let Some(bad) = params.iter().find(|p| !p.is_finite()) {
            return Err(Error::Domain(format!(
                "{family} parameter {bad} is not finite"
            )));
        }
        if family == Family::Pendulum && params[0] == 0.0 {
            return Err(Error::Domain(
                "pendulum moment of inertia J must be nonzero".into(),
            ));
        }
        Ok(SystemSpec { family, params })
    }

    /// Lorenz with `a = 10`, `c = 8/3`.
    pub fn lorenz(rho: f64) -> Self {
        SystemSpec::new(Family::Lorenz, vec![10.0, rho, 8.0 / 3.0]).expect("valid lorenz")
    }

    /// Rössler with `a = b = 0.2`.
    pub fn rossler(c: f64) -> Self {
        SystemSpec::new(Family::Rossler, vec![0.2, 0.2, c]).expect("valid rossler")
    }

    pub fn chen(a: f64, b: f64, c: f64) -> Self {
        SystemSpec::new(Family::Chen, vec![a, b, c]).expect("valid chen")
    }

    /// Hindmarsh-Rose with `(a, b, c, d, r, s, x0) = (1, 3, 1, 5, 6e-3, 4, -1.56)`.
    pub fn hindmarsh_rose(current: f64) -> Self {
        SystemSpec::new(
            Family::HindmarshRose,
            vec![1.0, 3.0, 1.0, 5.0, 6e-3, 4.0, -1.56, current],
        )
        .expect("valid hindmarsh-rose")
    }

    /// Driven torsion pendulum; `params = [J, gamma, k, m, r, M, omega_d]`.
    pub fn pendulum(params: [f64; 7]) -> Result<Self> {
        SystemSpec::new(Family::Pendulum, params.to_vec())
    }

    /// The chaotic pendulum used in the experimental comparison.
    pub fn pendulum_reference() -> Self {
        SystemSpec::pendulum([1.0, 0.3, 5.0, 3.0, 0.2, 0.4, 1.0]).expect("valid pendulum")
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    /// Driving frequency of the pendulum; `None` for autonomous families.
    pub fn drive_frequency(&self) -> Option<f64> {
        (self.family == Family::Pendulum).then(|| self.params[6])
    }

    /// Checked evaluation of the right-hand side.
    pub fn rhs(&self, state: &[f64], t: f64) -> Result<Vec<f64>> {
        if state.len() != self.dim() {
            return Err(Error::Contract(format!(
                "{} state has dimension {}, got {}",
                self.family,
                self.dim(),
                state.len()
            )));
        }
        if !t.is_finite() || state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite state {state:?} at t = {t}"
            )));
        }
        let mut out = vec![0.0; self.dim()];
        self.eval(t, state, &mut out);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite derivative at {state:?}")));
        }
        Ok(out)
    }
}

impl fmt::Display for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.family, self.params)
    }
}

impl VectorField for SystemSpec {
    fn dim(&self) -> usize {
        self.family.dim()
    }

    fn eval(&self, t: f64, s: &[f64], out: &mut [f64]) {
        let p = &self.params;
        match self.family {
            Family::Lorenz => {
                let (a, rho, c) = (p[0], p[1], p[2]);
                out[0] = a * (s[1] - s[0]);
                out[1] = rho * s[0] - s[1] - s[0] * s[2];
                out[2] = s[0] * s[1] - c * s[2];
            }
            Family::Rossler => {
                let (a, b, c) = (p[0], p[1], p[2]);
                out[0] = -s[1] - s[2];
                out[1] = s[0] + a * s[1];
                out[2] = b + s[2] * (s[0] - c);
            }
            Family::Chen => {
                let (a, b, c) = (p[0], p[1], p[2]);
                out[0] = a * (s[1] - s[0]);
                out[1] = (c - a) * s[0] + c * s[1] - s[0] * s[2];
                out[2] = s[0] * s[1] - b * s[2];
            }
            Family::HindmarshRose => {
                let (a, b, c, d, r, sc, x0, current) =
                    (p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7]);
                let x = s[0];
                out[0] = s[1] - a * x * x * x + b * x * x - s[2] + current;
                out[1] = c - d * x * x - s[1];
                out[2] = r * (sc * (x - x0) - s[2]);
            }
            Family::Pendulum => {
                let (j, gamma, k, m, r, torque, omega_d) =
                    (p[0], p[1], p[2], p[3], p[4], p[5], p[6]);
                let (theta, omega) = (s[0], s[1]);
                out[0] = omega;
                out[1] = (-gamma * omega - k * theta
                    + m * GRAVITY * r * theta.sin()
                    + torque * (omega_d * t).cos())
                    / j;
            }
        }
    }
}
