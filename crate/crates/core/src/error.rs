use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected_width}x{expected_height}, got {width}x{height}")]
    DimensionMismatch {
        expected_width: usize,
        expected_height: usize,
        width: usize,
        height: usize,
    },

    #[error("image too small: {width}x{height} at pyramid level {level} (minimum {min}x{min})")]
    ImageTooSmall {
        width: usize,
        height: usize,
        level: usize,
        min: usize,
    },

    #[error("degenerate point configuration: {0}")]
    Degenerate(String),

    #[error("tracking failure: {0}")]
    TrackingFailure(String),

    #[error("evaluation failure: {0}")]
    Evaluation(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed binary data at byte {offset}: {message}")]
    Binary { offset: usize, message: String },

    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image codec error on {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors that stem from bad input or I/O rather than a failed
    /// estimation. The CLI maps these to its usage/IO exit code.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::TrackingFailure(_) | Error::Evaluation(_) | Error::Degenerate(_)
        )
    }
}
