use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the clustering library.
///
/// Column indices carried by variants are 1-based, as they are reported to users.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("order statistic rank {rank} out of range for {len} values")]
    RankOutOfRange { rank: usize, len: usize },

    #[error("active column set is empty")]
    EmptyActiveSet,

    #[error("scaling threshold of column {column} is not strictly positive ({value})")]
    NonpositiveThreshold { column: usize, value: f64 },

    #[error("order statistic {rank} of column {column} is not strictly positive ({value})")]
    NonpositiveOrderStat { column: usize, rank: usize, value: f64 },

    #[error("active set exhausted before group {group} could be formed")]
    ActiveSetExhausted { group: usize },

    #[error("{routine} did not converge after {iterations} iterations ({detail})")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
        detail: String,
    },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("matrix is not positive definite (pivot {pivot} = {value})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.position() {
            Some(pos) => Error::Parse {
                row: pos.line() as usize,
                column: 0,
                message: e.to_string(),
            },
            None => Error::Io(e.to_string()),
        }
    }
}
