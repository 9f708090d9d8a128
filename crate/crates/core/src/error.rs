use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the decomposition, training and I/O routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value at t = {t}")]
    NonFiniteSample { t: f64 },

    #[error("signal has zero power, SNR is undefined")]
    ZeroPower,

    #[error("too few extrema: need at least {needed}, found {found}")]
    TooFewExtrema { needed: usize, found: usize },

    #[error("zero-norm component {0}")]
    ZeroNorm(usize),

    #[error("non-finite gradient at {0}")]
    NonFiniteGradient(String),

    #[error("matrix is rank deficient (smallest singular value {0:e})")]
    RankDeficient(f64),

    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("missing trained model for {0}")]
    MissingModel(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
