use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("capacity exceeded: {what} (limit {limit})")]
    Capacity { what: String, limit: u64 },

    #[error("128-bit overflow at coefficient {index}; use arbitrary-precision mode")]
    Overflow { index: usize },

    #[error("{value} lies outside the prime table (limit {limit})")]
    OutOfRange { value: u64, limit: u64 },

    #[error("p = {0} is a bad prime for this form")]
    BadPrime(u64),

    #[error("value {value} at p = {p} is outside [-1, 1]")]
    Domain { p: u64, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("corrupt cache file {path}: {reason}")]
    CorruptCache { path: PathBuf, reason: String },

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn capacity(what: impl Into<String>, limit: u64) -> Self {
        Error::Capacity {
            what: what.into(),
            limit,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
