//! Experiment plumbing: configs, the figure registry, runs, CSV artifacts,
//! and measured-data ingestion.

pub mod config;
pub mod ingest;
pub mod output;
pub mod registry;
pub mod runner;
pub mod sweep;

pub use config::{Check, ExperimentConfig, Op, ReservoirParams, Setup, SweepConfig};
pub use ingest::{ingest_csv, IngestSpec, LowPass};
pub use output::{emit_plot_data, output_root, write_report, OUT_ENV};
pub use registry::{builtins, describe, lookup};
pub use runner::{run_experiment, run_seed, Artifact, ExperimentReport};
pub use sweep::run_sweep;

/// Fixed 15-significant-digit scientific notation used in every CSV.
pub fn fmt_value(v: f64) -> String {
    format!("{v:.14e}")
}
