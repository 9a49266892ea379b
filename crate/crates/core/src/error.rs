use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate triangle {triangle}: area {area:e} below threshold {threshold:e}")]
    DegenerateTriangle { triangle: usize, area: f64, threshold: f64 },

    #[error("incompatible surface: integral of H^2 is {0:e}")]
    IncompatibleSurface(f64),

    #[error("surface evolution produced a non-finite position at vertex {vertex}")]
    Evolution { vertex: usize },

    #[error("mismatched connectivity between snapshots")]
    MismatchedConnectivity,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("right-hand side is not mean-zero: integral {integral:e} exceeds {tolerance:e}")]
    IncompatibleRhs { integral: f64, tolerance: f64 },

    #[error("{solver} did not converge in {iterations} iterations (relative residual {residual:e})")]
    NonConvergence { solver: &'static str, iterations: usize, residual: f64 },

    #[error("{solver} broke down at iteration {iteration}")]
    Breakdown { solver: &'static str, iteration: usize },

    #[error("sparse factorization failed: {0}")]
    Factorization(String),

    #[error("singular argument {0} outside (-1, 1)")]
    SingularArgument(f64),

    #[error("step failed: {reason} (residual history {history:?})")]
    StepFailure { reason: String, history: Vec<f64> },

    #[error("invalid mean value {0}: the mean phase must satisfy |mean| < 1")]
    InvalidMean(f64),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("invalid configuration at {path}: {message}")]
    Config { path: String, message: String },
}
