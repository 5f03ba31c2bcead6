use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad or unreadable input data.
    Input,
    /// Invalid parameters or configuration.
    Config,
    /// A mathematically undefined request (empty distribution, zero variance, ...).
    Domain,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("entropy of an empty distribution is undefined")]
    EmptyDistribution,

    #[error("delta must contain at least one element")]
    EmptyDelta,

    #[error("alpha must be finite and non-negative, got {0}")]
    InvalidAlpha(f64),

    #[error("alpha {0} is not tracked by this accumulator")]
    UntrackedAlpha(f64),

    #[error("{0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{location}: {message}")]
    Parse { location: String, message: String },

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::EmptyDistribution | Error::EmptyDelta | Error::Domain(_) => ErrorKind::Domain,
            Error::InvalidAlpha(_) | Error::UntrackedAlpha(_) | Error::Config(_) => {
                ErrorKind::Config
            }
            Error::Parse { .. } | Error::File { .. } | Error::Io(_) => ErrorKind::Input,
        }
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }
}
