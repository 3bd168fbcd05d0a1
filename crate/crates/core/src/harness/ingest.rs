//! Measured pendulum series: CSV parsing, optional angular-velocity
//! reconstruction, low-pass filtering, and normalization.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSpec {
    pub path: PathBuf,
    /// Sampling frequency in Hz.
    pub sample_rate: f64,
    /// Low-pass cutoff in Hz; must be below the Nyquist frequency.
    pub cutoff: f64,
    /// Time column in seconds; rows are taken as `1 / sample_rate` apart
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_column: Option<String>,
    pub theta_column: String,
    /// Reconstructed from theta by forward difference when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_column: Option<String>,
}

impl IngestSpec {
    /// Reads a TOML spec; a relative `path` resolves against the spec's
    /// directory.
    pub fn load(spec_path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(spec_path).map_err(|e| Error::io(spec_path, e))?;
        let mut spec: IngestSpec = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", spec_path.display())))?;
        if spec.path.is_relative() {
            if let Some(dir) = spec_path.parent() {
                spec.path = dir.join(&spec.path);
            }
        }
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::Config(format!(
                "sample rate must be positive, got {}",
                self.sample_rate
            )));
        }
        if !(self.cutoff > 0.0 && self.cutoff < self.sample_rate / 2.0) {
            return Err(Error::Config(format!(
                "cutoff {} Hz must lie in (0, {}) Hz",
                self.cutoff,
                self.sample_rate / 2.0
            )));
        }
        if !self.path.exists() {
            return Err(Error::MissingArtifact(self.path.clone()));
        }
        Ok(())
    }
}

/// First-order IIR low-pass (exponential smoothing)
/// `y[n] = y[n-1] + a (x[n] - y[n-1])` with `a = dt / (RC + dt)` and
/// `RC = 1 / (2π f_cut)`, i.e. `H(z) = a / (1 - (1 - a) z⁻¹)`.
/// Starts at `y[0] = x[0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowPass {
    a: f64,
}

impl LowPass {
    pub fn new(cutoff: f64, sample_rate: f64) -> Self {
        let dt = 1.0 / sample_rate;
        let rc = 1.0 / (2.0 * PI * cutoff);
        LowPass { a: dt / (rc + dt) }
    }

    pub fn coefficient(&self) -> f64 {
        self.a
    }

    /// `|H|` at frequency `f` for sample rate `fs`.
    pub fn gain(&self, f: f64, sample_rate: f64) -> f64 {
        let w = 2.0 * PI * f / sample_rate;
        let b = 1.0 - self.a;
        self.a / (1.0 - 2.0 * b * w.cos() + b * b).sqrt()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(x.len());
        let mut y = match x.first() {
            Some(&v) => v,
            None => return out,
        };
        for &v in x {
            y += self.a * (v - y);
            out.push(y);
        }
        out
    }
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Ingest {
            row: 1,
            message: format!(
                "no column `{name}` in header {:?}",
                headers.iter().collect::<Vec<_>>()
            ),
        })
}

/// Reads `spec.path` into a two-channel `(theta, omega)` trajectory,
/// filtered and normalized onto `[-1, 1]`. Row numbers in errors are file
/// lines (the header is line 1).
pub fn ingest_csv(spec: &IngestSpec) -> Result<Trajectory> {
    spec.validate()?;
    let mut reader = csv::Reader::from_path(&spec.path)?;
    let headers = reader.headers()?.clone();
    let theta_idx = column(&headers, &spec.theta_column)?;
    let omega_idx = spec
        .omega_column
        .as_deref()
        .map(|c| column(&headers, c))
        .transpose()?;
    let time_idx = spec
        .time_column
        .as_deref()
        .map(|c| column(&headers, c))
        .transpose()?;
    let dt = 1.0 / spec.sample_rate;

    let mut times = Vec::new();
    let mut theta = Vec::new();
    let mut omega = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec?;
        let field = |idx: usize| -> Result<f64> {
            let raw = rec.get(idx).ok_or_else(|| Error::Ingest {
                row: line,
                message: format!("missing field {idx}"),
            })?;
            let v: f64 = raw.trim().parse().map_err(|_| Error::Ingest {
                row: line,
                message: format!("cannot parse `{raw}`"),
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Ingest {
                    row: line,
                    message: format!("non-finite value `{raw}`"),
                })
            }
        };
        if let Some(ti) = time_idx {
            let t = field(ti)?;
            if let Some(&prev) = times.last() {
                let step = t - prev;
                if !(step > 0.0) {
                    return Err(Error::Ingest {
                        row: line,
                        message: format!("time {t} does not increase past {prev}"),
                    });
                }
                if step > 1.5 * dt {
                    return Err(Error::Ingest {
                        row: line,
                        message: format!("gap of {step} s exceeds one sample ({dt} s)"),
                    });
                }
            }
            times.push(t);
        }
        theta.push(field(theta_idx)?);
        if let Some(oi) = omega_idx {
            omega.push(field(oi)?);
        }
    }
    if theta.len() < 3 {
        return Err(Error::Ingest {
            row: theta.len() + 1,
            message: "need at least three data rows".into(),
        });
    }
    if omega_idx.is_none() {
        omega = theta.windows(2).map(|w| (w[1] - w[0]) / dt).collect();
        theta.pop();
    }
    let filter = LowPass::new(spec.cutoff, spec.sample_rate);
    let theta = filter.apply(&theta);
    let omega = filter.apply(&omega);
    let t0 = times.first().copied().unwrap_or(0.0);
    let data = theta
        .iter()
        .zip(&omega)
        .flat_map(|(&a, &b)| [a, b])
        .collect();
    Trajectory::from_rows(dt, t0, 2, data)?.normalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    fn spec(path: PathBuf) -> IngestSpec {
        IngestSpec {
            path,
            sample_rate: 50.0,
            cutoff: 5.0,
            time_column: Some("t".into()),
            theta_column: "theta".into(),
            omega_column: Some("omega".into()),
        }
    }

    #[test]
    fn sine_amplitude_survives_filter() {
        let fs = 50.0;
        let filter = LowPass::new(5.0, fs);
        let x: Vec<f64> = (0..5000)
            .map(|i| (2.0 * PI * 0.2 * i as f64 / fs).sin())
            .collect();
        let y = filter.apply(&x);
        let tail = &y[1000..];
        let amp = 0.5
            * (tail.iter().cloned().fold(f64::MIN, f64::max)
                - tail.iter().cloned().fold(f64::MAX, f64::min));
        assert!((amp - 1.0).abs() < 0.02, "amplitude {amp}");
        assert!((amp - filter.gain(0.2, fs)).abs() < 1e-3);
    }

    #[test]
    fn gain_matches_simulated_response() {
        let fs = 50.0;
        let filter = LowPass::new(5.0, fs);
        for f in [1.0, 5.0, 10.0] {
            let x: Vec<f64> = (0..20_000)
                .map(|i| (2.0 * PI * f * i as f64 / fs).sin())
                .collect();
            let y = filter.apply(&x);
            let tail = &y[10_000..];
            // RMS over whole periods; the sampled peak misses the true one at 10 samples/period.
            let amp = (2.0 * tail.iter().map(|v| v * v).sum::<f64>() / tail.len() as f64).sqrt();
            assert!(
                (amp - filter.gain(f, fs)).abs() < 0.02 * filter.gain(f, fs),
                "f {f}: {amp}"
            );
        }
    }

    #[test]
    fn nan_row_is_named() {
        let f = write_csv("t,theta,omega\n0,0.1,0.2\n0.02,NaN,0.1\n0.04,0.3,0.1\n");
        match ingest_csv(&spec(f.path().to_path_buf())) {
            Err(Error::Ingest { row, .. }) => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gaps_and_reversals_are_rejected() {
        let gap = write_csv("t,theta,omega\n0,0.1,0.2\n0.02,0.2,0.1\n0.1,0.3,0.1\n0.12,0.3,0.1\n");
        assert!(matches!(
            ingest_csv(&spec(gap.path().to_path_buf())),
            Err(Error::Ingest { row: 4, .. })
        ));
        let back =
            write_csv("t,theta,omega\n0,0.1,0.2\n0.02,0.2,0.1\n0.01,0.3,0.1\n0.04,0.3,0.1\n");
        assert!(matches!(
            ingest_csv(&spec(back.path().to_path_buf())),
            Err(Error::Ingest { row: 4, .. })
        ));
    }

    #[test]
    fn bad_spec_is_rejected() {
        let f = write_csv("t,theta,omega\n0,0.1,0.2\n");
        let mut s = spec(f.path().to_path_buf());
        s.cutoff = 25.0;
        assert!(matches!(s.validate(), Err(Error::Config(_))));
        s.cutoff = 5.0;
        s.sample_rate = 0.0;
        assert!(matches!(s.validate(), Err(Error::Config(_))));
        s.sample_rate = 50.0;
        s.theta_column = "angle".into();
        assert!(matches!(ingest_csv(&s), Err(Error::Ingest { row: 1, .. })));
    }

    #[test]
    fn omega_reconstructed_by_forward_difference() {
        let mut text = String::from("theta\n");
        for i in 0..2000 {
            let t = i as f64 / 50.0;
            text.push_str(&format!("{}\n", (0.3 * t).sin()));
        }
        let f = write_csv(&text);
        let s = IngestSpec {
            time_column: None,
            omega_column: None,
            ..spec(f.path().to_path_buf())
        };
        let traj = ingest_csv(&s).unwrap();
        assert_eq!(traj.len(), 1999);
        assert_eq!(traj.dt(), 0.02);
        let raw = traj.denormalize();
        let mid = raw.row(1000);
        let t: f64 = 1000.0 / 50.0;
        assert!((mid[1] - 0.3 * (0.3 * t).cos()).abs() < 0.01, "{mid:?}");
    }
}
