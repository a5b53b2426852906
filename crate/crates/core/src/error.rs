//! Crate-wide error type.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },

    #[error("non-finite value produced by {0}")]
    NonFiniteValue(&'static str),

    #[error("all positions are masked")]
    AllMasked,

    #[error("backward requires a scalar recorded on the tape")]
    NotScalar,

    #[error("tape already consumed by a previous backward pass")]
    TapeConsumed,

    #[error("unknown or unsupported format: {0}")]
    UnknownFormat(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("malformed number: {0}")]
    MalformedNumber(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("not a permutation of 0..{0}")]
    NotAPermutation(usize),

    #[error("best-known cost must be positive, got {0}")]
    NonPositiveBest(f64),

    #[error("instance too large for exhaustive search (n = {n}, limit {limit})")]
    TooLarge { n: usize, limit: usize },

    #[error("checkpoint version {found} not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(op: &'static str, detail: impl Into<String>) -> Self {
        Error::ShapeMismatch {
            op,
            detail: detail.into(),
        }
    }
}
