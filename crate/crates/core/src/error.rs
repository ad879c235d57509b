use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the odometry pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("file not found: {}", .0.display())]
    NotFound(PathBuf),

    #[error("format error in {}: {reason}", path.display())]
    Format { path: PathBuf, reason: String },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("rank-deficient point set: {0}")]
    RankDeficient(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
