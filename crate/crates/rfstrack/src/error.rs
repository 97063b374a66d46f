//! Crate-wide error type and exit-code mapping.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("component weight must be finite and nonnegative, got {0}")]
    InvalidWeight(f64),

    #[error("covariance is not positive definite")]
    NotPositiveDefinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{count} measurements exceed the cardinality support 0..={max}")]
    CardinalityExhausted { count: usize, max: usize },

    #[error("cardinality update has no support for {count} measurements")]
    CardinalityDegenerate { count: usize },

    #[error("singular innovation covariance for component {index}")]
    SingularInnovation { index: usize },

    #[error("no mixture component supports measurement {index}")]
    DegenerateLikelihood { index: usize },

    #[error("config error at {path}:{line}: {message}")]
    Config {
        path: String,
        line: usize,
        message: String,
    },

    #[error("data error in {path}: {message}")]
    Data { path: String, message: String },

    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 0 success, 2 config, 3 data, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidParameter(_) => 2,
            Error::Data { .. } | Error::Io(_) => 3,
            Error::DimensionMismatch { .. }
            | Error::InvalidWeight(_)
            | Error::NotPositiveDefinite
            | Error::CardinalityExhausted { .. }
            | Error::CardinalityDegenerate { .. }
            | Error::SingularInnovation { .. }
            | Error::DegenerateLikelihood { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
