use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a raw record is mapped onto `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Each channel's `[min, max]` onto `[-1, 1]`.
    #[default]
    MinMax,
    /// Each channel divided by its largest magnitude. Keeps zero fixed, so
    /// systems whose variables scale with a parameter stay commensurate.
    MaxAbs,
}

/// Per-channel affine map of `[min, max]` onto `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Scaler {
    /// Fits the scaler to the column ranges of row-major `data`.
    pub fn fit(data: &[f64], n_channels: usize) -> Result<Self> {
        let mut min = vec![f64::INFINITY; n_channels];
        let mut max = vec![f64::NEG_INFINITY; n_channels];
        for row in data.chunks_exact(n_channels) {
            for (c, &v) in row.iter().enumerate() {
                min[c] = min[c].min(v);
                max[c] = max[c].max(v);
            }
        }
        for c in 0..n_channels {
            if !(max[c] > min[c]) {
                return Err(Error::ConstantChannel {
                    channel: c,
                    value: min[c],
                });
            }
        }
        Ok(Scaler { min, max })
    }

    /// Symmetric scaler `[-m, m]` with `m` the largest magnitude per channel.
    pub fn fit_max_abs(data: &[f64], n_channels: usize) -> Result<Self> {
        let mut m = vec![0.0_f64; n_channels];
        for row in data.chunks_exact(n_channels) {
            for (c, &v) in row.iter().enumerate() {
                m[c] = m[c].max(v.abs());
            }
        }
        if let Some(c) = m.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::ConstantChannel {
                channel: c,
                value: 0.0,
            });
        }
        Ok(Scaler {
            min: m.iter().map(|v| -v).collect(),
            max: m,
        })
    }

    pub fn fit_with(data: &[f64], n_channels: usize, mode: Normalization) -> Result<Self> {
        match mode {
            Normalization::MinMax => Scaler::fit(data, n_channels),
            Normalization::MaxAbs => Scaler::fit_max_abs(data, n_channels),
        }
    }

    pub fn n_channels(&self) -> usize {
        self.min.len()
    }

    pub fn forward(&self, channel: usize, value: f64) -> f64 {
        let (lo, hi) = (self.min[channel], self.max[channel]);
        2.0 * (value - lo) / (hi - lo) - 1.0
    }

    pub fn inverse(&self, channel: usize, value: f64) -> f64 {
        let (lo, hi) = (self.min[channel], self.max[channel]);
        lo + 0.5 * (value + 1.0) * (hi - lo)
    }

    /// Restricts the scaler to a subset of channels, in the given order.
    pub fn select(&self, channels: &[usize]) -> Scaler {
        Scaler {
            min: channels.iter().map(|&c| self.min[c]).collect(),
            max: channels.iter().map(|&c| self.max[c]).collect(),
        }
    }
}

/// Uniformly sampled multichannel time series, stored row-major
/// (one row per sample).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dt: f64,
    t0: f64,
    n_channels: usize,
    data: Vec<f64>,
    scaler: Option<Scaler>,
}

impl Trajectory {
    pub fn from_rows(dt: f64, t0: f64, n_channels: usize, data: Vec<f64>) -> Result<Self> {
        if n_channels == 0 || !data.len().is_multiple_of(n_channels) {
            return Err(Error::Contract(format!(
                "{} values do not form rows of {n_channels} channels",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite value at row {}, channel {}",
                i / n_channels,
                i % n_channels
            )));
        }
        Ok(Trajectory {
            dt,
            t0,
            n_channels,
            data,
            scaler: None,
        })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.n_channels
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_channels..(i + 1) * self.n_channels]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.n_channels)
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        self.rows().map(|r| r[c]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn scaler(&self) -> Option<&Scaler> {
        self.scaler.as_ref()
    }

    /// Attaches a scaler record without touching the data, for series that
    /// are already in normalized units (e.g. reservoir outputs).
    pub fn with_scaler(mut self, scaler: Option<Scaler>) -> Self {
        self.scaler = scaler;
        self
    }

    /// Copies rows `range` into a new trajectory with shifted `t0`.
    pub fn slice(&self, range: Range<usize>) -> Result<Trajectory> {
        if range.start > range.end || range.end > self.len() {
            return Err(Error::Contract(format!(
                "slice {range:?} out of bounds for trajectory of length {}",
                self.len()
            )));
        }
        Ok(Trajectory {
            dt: self.dt,
            t0: self.time(range.start),
            n_channels: self.n_channels,
            data: self.data[range.start * self.n_channels..range.end * self.n_channels].to_vec(),
            scaler: self.scaler.clone(),
        })
    }

    /// Keeps only `channels`, in the given order.
    pub fn select(&self, channels: &[usize]) -> Result<Trajectory> {
        if let Some(&c) = channels.iter().find(|&&c| c >= self.n_channels) {
            return Err(Error::Contract(format!(
                "channel {c} out of range for {} channels",
                self.n_channels
            )));
        }
        let data = self
            .rows()
            .flat_map(|r| channels.iter().map(move |&c| r[c]))
            .collect();
        Ok(Trajectory {
            dt: self.dt,
            t0: self.t0,
            n_channels: channels.len(),
            data,
            scaler: self.scaler.as_ref().map(|s| s.select(channels)),
        })
    }

    /// Appends a constant channel (e.g. a fixed auxiliary input); the new
    /// channel is left unscaled.
    pub fn with_constant_channel(&self, value: f64) -> Trajectory {
        let mut data = Vec::with_capacity(self.len() * (self.n_channels + 1));
        for r in self.rows() {
            data.extend_from_slice(r);
            data.push(value);
        }
        Trajectory {
            dt: self.dt,
            t0: self.t0,
            n_channels: self.n_channels + 1,
            data,
            scaler: None,
        }
    }

    /// Fits a min-max scaler and maps every channel onto `[-1, 1]`.
    pub fn normalize(&self) -> Result<Trajectory> {
        self.normalize_with(Normalization::MinMax)
    }

    pub fn normalize_with(&self, mode: Normalization) -> Result<Trajectory> {
        if self.scaler.is_some() {
            return Err(Error::Contract("trajectory is already normalized".into()));
        }
        let scaler = Scaler::fit_with(&self.data, self.n_channels, mode)?;
        Ok(self.apply_scaler(scaler))
    }

    /// Maps raw data through an existing scaler.
    pub fn apply_scaler(&self, scaler: Scaler) -> Trajectory {
        assert_eq!(
            scaler.n_channels(),
            self.n_channels,
            "scaler width mismatch"
        );
        let n = self.n_channels;
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(i, &v)| scaler.forward(i % n, v))
            .collect();
        Trajectory {
            dt: self.dt,
            t0: self.t0,
            n_channels: n,
            data,
            scaler: Some(scaler),
        }
    }

    /// Undoes the stored scaler; identity if none.
    pub fn denormalize(&self) -> Trajectory {
        let Some(scaler) = &self.scaler else {
            return self.clone();
        };
        let n = self.n_channels;
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(i, &v)| scaler.inverse(i % n, v))
            .collect();
        Trajectory {
            dt: self.dt,
            t0: self.t0,
            n_channels: n,
            data,
            scaler: None,
        }
    }
}
