use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid subspace: {0}")]
    InvalidSubspace(String),

    #[error("power iteration did not converge after {iterations} iterations (last estimate {estimate})")]
    NoConvergence {
        iterations: usize,
        estimate: f64,
        last_iterate: Vec<f64>,
    },

    #[error("oracle unavailable: dimension {dim} exceeds cap {cap}")]
    OracleCap { dim: usize, cap: usize },

    #[error("schedule error: {0}")]
    Schedule(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("certification unavailable: {0}")]
    CertificationUnavailable(String),

    #[error("lip = {given} is below the estimated ‖A*A‖ = {estimate}")]
    LipTooSmall { given: f64, estimate: f64 },

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("no limit detected within horizon {horizon}")]
    Undetected { horizon: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn dim(context: &'static str, expected: usize, got: usize) -> Self {
        Error::Dimension {
            context,
            expected,
            got,
        }
    }
}
