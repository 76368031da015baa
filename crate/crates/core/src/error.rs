use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grading entry ({i},{j}) has modulus {modulus}, expected 1")]
    NonUnimodularEntry { i: usize, j: usize, modulus: f64 },

    #[error("grading entries ({i},{j}) and ({j},{i}) disagree")]
    SymmetryConflict { i: usize, j: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("site {site} out of range for a chain of {num_sites} sites")]
    SiteOutOfRange { site: usize, num_sites: usize },

    #[error("operator layout has no auxiliary factor")]
    NoAuxiliaryFactor,

    #[error("eta must be nonzero")]
    ZeroEta,

    #[error("statistical parameter {value} is not unimodular")]
    NonUnimodularQ { value: Complex64 },

    #[error("a(u) = {value} lies inside the singular guard band")]
    SingularDenominator { value: Complex64 },

    #[error("grading mismatch: {0}")]
    GradingMismatch(String),

    #[error("dimension {dim} exceeds the cap of {cap}")]
    ResourceLimit { dim: usize, cap: usize },

    #[error("tau(0) is ill conditioned (condition number {condition:e})")]
    SingularShift { condition: f64 },

    #[error("eigensolver failed: {0}")]
    ConvergenceFailure(String),

    #[error("vanishing denominator at root {index}")]
    PoleAtRoot { index: usize },

    #[error("spectral parameter {lambda} coincides with a pole")]
    PoleAtLambda { lambda: Complex64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("roots {first} and {second} collided")]
    DegenerateRoots { first: usize, second: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
