use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("sample covariance is singular (data lie in an affine subspace)")]
    DegenerateSample,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("too few points: need at least {needed}, found {found}")]
    TooFewPoints { needed: usize, found: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("support violation: {0}")]
    SupportViolation(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("empty input")]
    EmptyInput,
    #[error("point lies off the line of a degenerate polygon")]
    DegeneratePolygon,
}
