use std::io;
use std::path::PathBuf;

use crate::rle::Run;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("index ({x}, {y}, {z}) out of bounds for grid {dims}")]
    OutOfBounds {
        x: usize,
        y: usize,
        z: usize,
        dims: crate::grid::Dims,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("truncated data: decoded {decoded} of {expected} cells")]
    Truncated { decoded: u64, expected: u64 },

    #[error("length mismatch: decoded {decoded} cells, expected {expected}")]
    LengthMismatch { decoded: u64, expected: u64 },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("run {run} (at run index {position}) is not covered by the codebook")]
    OutOfVocabulary { run: Run, position: usize },

    #[error("invalid token id {id} (codebook has {vocab_size} tokens)")]
    InvalidToken { id: u32, vocab_size: usize },

    #[error("stream was produced with codebook {expected}, but codebook {found} was supplied")]
    WrongCodebook { expected: String, found: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
