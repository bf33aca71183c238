use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input in {0}")]
    NonFiniteInput(&'static str),

    #[error("negative chamber pressure {value} at index {index}")]
    NegativePressure { index: usize, value: f64 },

    #[error("inertia matrix is singular or ill-conditioned (condition number {0:e})")]
    SingularInertia(f64),

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("optimization problem is infeasible: {0}")]
    Infeasible(String),

    #[error("solver reached its iteration limit ({0} iterations)")]
    MaxIter(usize),

    #[error("Riccati iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("reference window too short: need {needed} samples, got {got}")]
    RefTooShort { needed: usize, got: usize },

    #[error("no feasible constraint box found")]
    NoFeasibleBox,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid configuration at `{path}`: {message}")]
    InvalidConfig { path: String, message: String },

    #[error("{0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
