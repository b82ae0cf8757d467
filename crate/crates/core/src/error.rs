use std::path::PathBuf;

/// Errors raised by the library. Statistical outcomes (decoder failures,
/// empty beta windows) are data and never surface here.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid face: {0}")]
    InvalidFace(String),

    #[error("face dimension {p} out of range for cube dimension {n}")]
    DimensionOutOfRange { p: usize, n: usize },

    #[error("faces of mixed dimension in one set")]
    MixedDimensions,

    #[error("empty set where a non-empty one is required")]
    EmptySet,

    #[error("cube dimension must be even and at least 2, got {0}")]
    OddDimension(usize),

    #[error("instance too large: {what} = {value} exceeds limit {limit}")]
    TooLarge {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
