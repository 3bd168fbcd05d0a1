use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Non-finite or out-of-domain numeric input.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller violated a shape or length precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("trajectory diverged at step {step}: |component| = {magnitude:e}")]
    Divergence { step: usize, magnitude: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    /// The random recurrent matrix could not be normalized; try another seed.
    #[error("reservoir construction failed: {0}")]
    Construction(String),

    #[error("scaling undefined for channel {channel}: constant value {value}")]
    ConstantChannel { channel: usize, value: f64 },

    #[error("ingestion error at row {row}: {message}")]
    Ingest { row: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown experiment `{id}`; registered: {}", registered.join(", "))]
    UnknownExperiment { id: String, registered: Vec<String> },

    #[error("all grid candidates failed")]
    GridExhausted { table: crate::training::ScoreTable },

    #[error("stage {stage}: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("experiment {experiment}, seed {seed}: {source}")]
    Experiment {
        experiment: String,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("missing artifact: {}", .0.display())]
    MissingArtifact(PathBuf),

    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
