use std::path::PathBuf;

use thiserror::Error;

/// Errors produced across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("grid frames do not match: {0}")]
    FrameMismatch(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },
    #[error("degenerate view: {0}")]
    DegenerateView(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("shape generation failed: {0}")]
    Generation(String),
    #[error("training aborted: {0}")]
    TrainingAborted(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("metric undefined: {0}")]
    UndefinedMetric(String),
    #[error("missing method in records: {0}")]
    MissingMethod(String),
    #[error("malformed file {path:?}: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
