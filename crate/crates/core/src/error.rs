use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinate {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("empty box at coordinate {index}: lower {lower} exceeds upper {upper}")]
    EmptyBox { index: usize, lower: i64, upper: i64 },

    #[error("constraint system has no feasible point (negative cycle)")]
    DomainEmpty,

    #[error("domain is not full-dimensional: {0}")]
    NotFullDimensional(String),

    #[error("refined region is empty")]
    InfeasibleRegion,

    #[error("enumeration exceeds the cap of {cap} points")]
    TooLarge { cap: usize },

    #[error("point lies outside the convex hull of the domain")]
    OutOfDomain,

    #[error("permutation does not order fractional parts descendingly or is not a permutation")]
    InvalidPermutation,

    #[error("cost oracle returned a non-finite value {value} at {point:?}")]
    OracleFailure { point: Vec<i64>, value: f64 },

    #[error("projection did not converge after {sweeps} sweeps (residual {residual:e})")]
    NonConvergence { sweeps: usize, residual: f64 },

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
