use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value at point {point}, coordinate {coord}")]
    NonFinite { point: usize, coord: usize },

    #[error("point set is empty")]
    EmptySet,

    #[error("invalid hull: {0}")]
    InvalidHull(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("cluster count {k} out of range for {n} points")]
    ClusterCountOutOfRange { k: usize, n: usize },

    #[error("hull kinds differ between models")]
    KindMismatch,

    #[error("no comparable cluster pair")]
    NoComparablePair,

    #[error("class {label:?} has {available} sets, needs more than {required}")]
    InsufficientSets {
        label: String,
        available: usize,
        required: usize,
    },

    #[error("monte-carlo probe supports dimension <= 3, got {0}")]
    DimensionTooHigh(usize),

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("duplicate set id {0:?}")]
    DuplicateId(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
