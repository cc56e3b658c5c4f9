use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Raster or field is too small (or mismatched) for the requested operation.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Caller-supplied value violates an operation's precondition.
    #[error("invalid input: {0}")]
    Input(String),

    /// An internal invariant was broken, e.g. a negative histogram bin.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("homography maps region behind the camera plane")]
    BehindPlane,

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Decode {
        path: PathBuf,
        #[source]
        source: ::image::ImageError,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
