use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Image(#[from] ImageIoError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("benchmark cell failed (image {image}, basis {basis}, ratio {ratio}): {source}")]
    Cell {
        image: String,
        basis: String,
        ratio: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

/// Failures while reading or writing image files.
#[derive(Debug, Error)]
pub enum ImageIoError {
    #[error("{path}: no such file")]
    Missing { path: PathBuf },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed header at byte {offset}: {reason}")]
    MalformedHeader {
        path: PathBuf,
        offset: usize,
        reason: String,
    },

    #[error("{path}: unsupported depth (maxval {maxval}, only 8-bit maxval 255 is accepted)")]
    UnsupportedDepth { path: PathBuf, maxval: u32 },

    #[error("{path}: pixel data truncated at byte {offset}")]
    Truncated { path: PathBuf, offset: usize },

    #[error("{path}: bad pixel value at byte {offset}: {reason}")]
    BadPixel {
        path: PathBuf,
        offset: usize,
        reason: String,
    },

    #[error("{path}: unsupported image format")]
    UnsupportedFormat { path: PathBuf },

    #[error("{path}: {reason}")]
    Decode { path: PathBuf, reason: String },
}
