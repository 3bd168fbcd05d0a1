use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    CoupledNetworkSpec, DatasetSplit, Normalization, SamplingProtocol, SystemSpec,
};
use crate::error::{Error, Result};
use crate::reservoir::ReservoirConfig;
use crate::training::GridSpec;

use super::ingest::IngestSpec;

/// The `(N, p, eta, alpha, sigma, lambda)` hyperparameters of one reservoir.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirParams {
    pub n: usize,
    pub p: f64,
    pub eta: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub lambda: f64,
}

impl ReservoirParams {
    pub const fn new(n: usize, p: f64, eta: f64, alpha: f64, sigma: f64, lambda: f64) -> Self {
        ReservoirParams {
            n,
            p,
            eta,
            alpha,
            sigma,
            lambda,
        }
    }

    pub fn config(&self, n_in: usize, n_out: usize, seed: u64) -> ReservoirConfig {
        ReservoirConfig {
            n_in,
            n_out,
            seed,
            ..ReservoirConfig::from_tuple(
                (
                    self.n,
                    self.p,
                    self.eta,
                    self.alpha,
                    self.sigma,
                    self.lambda,
                ),
                n_out,
            )
        }
    }
}

impl fmt::Display for ReservoirParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(N, p, eta, alpha, sigma, lambda) = ({}, {}, {}, {}, {}, {:e})",
            self.n, self.p, self.eta, self.alpha, self.sigma, self.lambda
        )
    }
}

fn default_washout() -> usize {
    400
}

fn default_train() -> usize {
    2600
}

/// A single system sampled into a normalized dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSource {
    pub system: SystemSpec,
    #[serde(default)]
    pub protocol: SamplingProtocol,
    #[serde(default = "default_washout")]
    pub washout: usize,
    #[serde(default = "default_train")]
    pub train: usize,
    #[serde(default)]
    pub scaling: Normalization,
}

impl DataSource {
    pub fn new(system: SystemSpec, protocol: SamplingProtocol) -> Self {
        DataSource {
            system,
            protocol,
            washout: default_washout(),
            train: default_train(),
            scaling: Normalization::default(),
        }
    }

    pub fn with_scaling(mut self, scaling: Normalization) -> Self {
        self.scaling = scaling;
        self
    }

    pub fn split(&self) -> Result<DatasetSplit> {
        DatasetSplit::for_record(self.washout, self.train, self.protocol.record_len)
    }
}

/// A coupled network sampled into a normalized dataset (all node channels).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSource {
    pub network: CoupledNetworkSpec,
    #[serde(default)]
    pub protocol: SamplingProtocol,
    #[serde(default = "default_washout")]
    pub washout: usize,
    #[serde(default = "default_train")]
    pub train: usize,
    #[serde(default)]
    pub scaling: Normalization,
}

impl NetworkSource {
    pub fn split(&self) -> Result<DatasetSplit> {
        DatasetSplit::for_record(self.washout, self.train, self.protocol.record_len)
    }
}

/// Train on one system, drive through `driven` channels with another.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrivenSetup {
    pub train: DataSource,
    pub drive: DataSource,
    pub reservoir: ReservoirParams,
    pub driven: Vec<usize>,
    /// Also run the two-copy generalized-synchronization test.
    #[serde(default)]
    pub auxiliary: bool,
}

/// Train once, then drive with copies of the training system whose
/// parameter `parameter` is lowered by each `delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MismatchSetup {
    pub train: DataSource,
    pub reservoir: ReservoirParams,
    pub driven: Vec<usize>,
    pub parameter: usize,
    pub deltas: Vec<f64>,
    /// Normalize every drive record with the training record's scaler
    /// instead of its own, so a mismatch is not hidden by rescaling.
    #[serde(default)]
    pub shared_scaler: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSetup {
    pub train: DataSource,
    pub reservoir: ReservoirParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSetup {
    pub drive: DataSource,
    pub relay_channel: usize,
    pub stages: Vec<StageSetup>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParallelSetup {
    pub train: NetworkSource,
    /// Node whose channels train the shared reservoir.
    pub train_node: usize,
    pub drive: NetworkSource,
    pub reservoir: ReservoirParams,
    /// Coupling strength between reservoir copies.
    pub rc_eps: f64,
    pub coupling_mask: Vec<bool>,
    pub driven: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSetup {
    pub dt: f64,
    pub total_time: f64,
    pub renorm_interval: f64,
    pub transient_time: f64,
}

/// Closed-loop prediction and driven inference on the forced pendulum,
/// with the driving frequency as a constant extra input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendulumSetup {
    pub data: DataSource,
    pub reservoir: ReservoirParams,
    pub warmup: usize,
    pub horizon_steps: usize,
    pub vpt_threshold: f64,
    pub lyapunov: LyapunovSetup,
    pub driven: Vec<usize>,
    /// Measured series to drive the trained model with, in addition to the
    /// simulated test segment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_drive: Option<IngestSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Setup {
    Driven(DrivenSetup),
    Mismatch(MismatchSetup),
    Chain(ChainSetup),
    Parallel(ParallelSetup),
    Pendulum(PendulumSetup),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Op {
    pub fn holds(self, value: f64, bound: f64) -> bool {
        match self {
            Op::Lt => value < bound,
            Op::Le => value <= bound,
            Op::Gt => value > bound,
            Op::Ge => value >= bound,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Gt => ">",
            Op::Ge => ">=",
        }
    }
}

/// A pass/fail threshold on one aggregated metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub metric: String,
    pub op: Op,
    pub value: f64,
}

impl Check {
    pub fn new(metric: &str, op: Op, value: f64) -> Self {
        Check {
            metric: metric.to_string(),
            op,
            value,
        }
    }
}

fn default_discard() -> usize {
    500
}

fn default_r0_scale() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub id: String,
    pub description: String,
    pub master_seed: u64,
    pub n_seeds: usize,
    /// Prediction steps excluded from every synchronization metric.
    #[serde(default = "default_discard")]
    pub discard: usize,
    /// Initial reservoir states are uniform on `(-r0_scale, r0_scale)`.
    #[serde(default = "default_r0_scale")]
    pub r0_scale: f64,
    pub setup: Setup,
    #[serde(default)]
    pub checks: Vec<Check>,
}

impl ExperimentConfig {
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.n_seeds as u64)
            .map(|i| self.master_seed + i)
            .collect()
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("serializing {}: {e}", self.id)))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() || self.n_seeds == 0 {
            return Err(Error::Config(
                "experiment needs an id and at least one seed".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.r0_scale) {
            return Err(Error::Config(format!(
                "r0_scale {} outside [0, 1]",
                self.r0_scale
            )));
        }
        match &self.setup {
            Setup::Driven(s) => {
                s.train.split()?;
                s.drive.split()?;
                if s.train.system.dim() != s.drive.system.dim() {
                    return Err(Error::Config(
                        "training and driving systems differ in dimension".into(),
                    ));
                }
            }
            Setup::Mismatch(s) => {
                s.train.split()?;
                if s.parameter >= s.train.system.params().len() {
                    return Err(Error::Config(format!("no parameter {}", s.parameter)));
                }
            }
            Setup::Chain(s) => {
                s.drive.split()?;
                if s.stages.is_empty() {
                    return Err(Error::Config("chain needs stages".into()));
                }
                for st in &s.stages {
                    st.train.split()?;
                }
            }
            Setup::Parallel(s) => {
                s.train.split()?;
                s.drive.split()?;
                s.train.network.validate()?;
                s.drive.network.validate()?;
                if s.train_node >= s.train.network.n_nodes {
                    return Err(Error::Config(format!("no node {}", s.train_node)));
                }
            }
            Setup::Pendulum(s) => {
                s.data.split()?;
                if s.data.system.drive_frequency().is_none() {
                    return Err(Error::Config(
                        "pendulum setup needs a pendulum system".into(),
                    ));
                }
                if let Some(ext) = &s.external_drive {
                    ext.validate()?;
                }
            }
        }
        Ok(())
    }
}

/// Grid search over reservoir hyperparameters for one training system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub id: String,
    pub master_seed: u64,
    pub train: DataSource,
    /// Reservoir size used for every candidate.
    pub n: usize,
    pub driven: Vec<usize>,
    #[serde(default = "default_discard")]
    pub discard: usize,
    /// Prediction steps scored by the objective.
    pub eval_steps: usize,
    pub grid: GridSpec,
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: SweepConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.train.split()?;
        cfg.grid.validate()?;
        Ok(cfg)
    }
}
