use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("total degree {total} is odd; a perfect matching needs an even number of half-edges")]
    OddTotalDegree { total: u64 },

    #[error("vertex {vertex} has degree 0; drop isolated vertices before building a degree sequence")]
    ZeroDegree { vertex: usize },

    #[error("degree sequence is empty")]
    EmptySequence,

    #[error("enumeration needs D <= {cap}, got D = {total}")]
    EnumerationCap { total: u64, cap: u64 },

    #[error("dense mode is capped at n <= {cap}, got n = {n}")]
    DenseCap { n: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("row {row} of the adjacency sums to {actual}, but its prescribed degree is {expected}")]
    RowSumMismatch { row: usize, expected: u64, actual: u64 },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("catalan({k}) overflows 64-bit integers (k <= 30 supported)")]
    CatalanOverflow { k: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no light vertex in the current pruning state")]
    NoLightVertex,

    #[error("operation requires a {expected} view")]
    WrongMode { expected: &'static str },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}
