use thiserror::Error;

/// Errors raised by the numerical kernels and the I/O layer.
///
/// Degenerate inputs are reported, never silently perturbed; callers
/// (usually the harness) decide whether to skip, retry or fail.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DslError {
    #[error("root finder did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("argument requested on the branch cut or at the origin: {re} + {im}i")]
    BranchCutViolation { re: f64, im: f64 },

    #[error("linear system is singular or ill-conditioned (pivot ratio {pivot_ratio:e})")]
    SingularSystem { pivot_ratio: f64 },

    #[error("input lies in the singular class diag(0, A+)")]
    SingularClassInput,

    #[error("spectral and Schur angle paths disagree: {spectral} vs {schur}")]
    CrossCheckMismatch { spectral: f64, schur: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("plane contains a time-like line; no affine slice exists")]
    NoSlice,

    #[error("boundary traces disagree at corner {corner}: {left} vs {right}")]
    CornerMismatch {
        corner: &'static str,
        left: f64,
        right: f64,
    },

    #[error("bisection bracket could not be established after {doublings} doublings")]
    BisectionFailure { doublings: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for DslError {
    fn from(e: std::io::Error) -> Self {
        DslError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for DslError {
    fn from(e: serde_json::Error) -> Self {
        DslError::InvalidInput(format!("json: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, DslError>;
