use thiserror::Error;

/// Errors raised by the exact kernels and the semigroup routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix is not symmetric (entry ({row}, {col}) differs from its transpose)")]
    NotSymmetric { row: usize, col: usize },

    #[error("malformed matrix: {0}")]
    MalformedMatrix(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not positive semidefinite")]
    NotPsd,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("matrix is not unimodular (|det| = {0})")]
    NotUnimodular(String),

    #[error("vector is not primitive (gcd of entries is {0})")]
    NotPrimitive(String),

    #[error("expected a rank-1 matrix, found rank {0}")]
    RankNotOne(usize),

    #[error("zero matrix has no rank-1 step")]
    ZeroMatrix,

    #[error("point is not in the second-order cone")]
    NotInCone,

    #[error("point is neither Pythagorean nor sporadic")]
    NotDescendable,

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
