use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("oracle budget exhausted: {remaining} calls left, batch needs {requested}")]
    BudgetExhausted { remaining: usize, requested: usize },

    #[error("learning-rate constant must be positive, got {0}")]
    NonpositiveRate(f64),

    #[error("interleave pattern does not match oracle budgets: {0}")]
    PatternMismatch(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0}: file contains no examples")]
    EmptyFile(PathBuf),

    #[error("{path}:{line}: expected {expected} features, found {found}")]
    InconsistentDimension {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
