use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("non-finite value at row {row} col {col}")]
    NonFinite { row: usize, col: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid graph: {0}")]
    InvalidDag(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("k = {k} out of range for n = {n} (need 1 <= k <= n - 1)")]
    KOutOfRange { k: usize, n: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
