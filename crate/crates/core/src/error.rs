use std::path::PathBuf;

use crate::state::Basis;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("basis mismatch: expected {expected}, got {found}")]
    BasisMismatch { expected: Basis, found: Basis },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("pixel ({0}, {1}) lies outside a {2}x{2} grid")]
    PixelOutOfBounds(usize, usize, usize),

    #[error("correlation coefficient {0} is too close to +/-1")]
    DegenerateCorrelation(f64),

    #[error("empty distribution: {0}")]
    EmptyDistribution(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed input in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl ToString) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.to_string(),
        }
    }
}
