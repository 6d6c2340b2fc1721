use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("backend failure: {0}")]
    Backend(String),

    #[error("corrupt measurement: {0}")]
    MeasurementCorrupt(String),

    #[error("report has no rows")]
    EmptyReport,

    #[error("need at least {needed} rows to plot, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("unexpected CSV header on line 1: expected `{expected}`, found `{found}`")]
    HeaderMismatch { expected: String, found: String },

    #[error("results file: {0}")]
    Results(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
