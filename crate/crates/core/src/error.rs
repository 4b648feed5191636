use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// The CLI maps variants onto its exit-code contract through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature is limited to d <= {max}, got d = {d}")]
    DimensionTooLarge { d: usize, max: usize },

    #[error("degenerate model: mu_in = mu_out = {0}, communities are indistinguishable")]
    DegenerateModel(f64),

    #[error("eigendecomposition failed: {0}")]
    Decomposition(String),

    #[error("unbounded: {0}")]
    Unbounded(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error in {path}: line {line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// 2 for configuration and input problems, 3 for a degenerate model, 4 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DegenerateModel(_) => 3,
            Error::Decomposition(_) | Error::Unbounded(_) => 4,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
