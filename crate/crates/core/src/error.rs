use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("infeasible coarse state: {0}")]
    InfeasibleState(String),

    #[error("iteration diverged at step {step}; last finite iterate {last:?}")]
    Divergence { step: usize, last: Vec<f64> },

    #[error("map evaluation produced non-finite output ({context})")]
    Evaluation { context: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("eigenvalue {eigenvalue} lies within {margin:e} of the stability boundary")]
    NonHyperbolic { eigenvalue: Complex64, margin: f64 },

    #[error("eigenvector matrix is near-defective (condition {condition:e})")]
    NearDefective { condition: f64 },

    #[error("degenerate least-squares system (all-zero design matrix)")]
    DegenerateSystem,

    #[error("singular matrix (estimated condition {condition:e})")]
    SingularMatrix { condition: f64 },

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("ill-conditioned eigen-coordinate transform (condition {condition:e})")]
    Transform { condition: f64 },

    #[error("no convergence after {iterations} iterations; residual history {history:?}")]
    NoConvergence { iterations: usize, history: Vec<f64> },

    #[error("branch terminated after {points} points: {reason}")]
    BranchTerminated { points: usize, reason: String },

    #[error("trajectory escaped the neighborhood: distance {distance:e} exceeds 10x radius {radius:e}")]
    EscapedNeighborhood { distance: f64, radius: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
