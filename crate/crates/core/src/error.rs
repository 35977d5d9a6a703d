use thiserror::Error;

/// Errors surfaced by the calculator.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed textual input (characters, dims, multiplicities).
    #[error("parse error: {0}")]
    Parse(String),

    /// The group rank of two values disagrees (e.g. dims of length 2 with
    /// rank-3 characters).
    #[error("rank mismatch: dims have k = {dims_k} but representation has k = {rep_k}")]
    RankMismatch { dims_k: usize, rep_k: usize },

    /// The number of summands does not equal the total sphere dimension.
    #[error("dimension mismatch: expected {expected} summands, got {actual}")]
    DimensionMismatch { expected: u64, actual: u64 },

    /// An argument is outside the supported domain (k > 16, k > n, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A persistent memo-cache file failed validation.
    #[error("cache error: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
