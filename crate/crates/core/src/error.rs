use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CddError>;

#[derive(Debug, Error)]
pub enum CddError {
    #[error("need at least {min} observations, got {got}")]
    TooFewObservations { got: usize, min: usize },

    #[error("paired columns differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },

    #[error("{what} = {value} is outside its domain")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("optimizer did not converge after {attempts} attempts")]
    NonConvergence { attempts: usize },

    #[error("{failed} of {total} bootstrap replicates failed")]
    BootstrapFailures { failed: usize, total: usize },

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("column {0:?} not found")]
    MissingColumn(String),

    #[error("cannot detect delimiter from header line")]
    AmbiguousDelimiter,

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
