use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnealError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("capacity exceeded: {what} requires n <= {limit}, got n = {n}")]
    Capacity {
        what: &'static str,
        limit: usize,
        n: usize,
    },

    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    #[error("norm drift {drift:.3e} exceeds tolerance after {steps} steps")]
    Convergence { drift: f64, steps: usize },

    #[error("eigensolver did not converge at tau = {tau}: residual {residual:.3e} after {iterations} iterations")]
    Solver {
        tau: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("incomplete data: {0}")]
    IncompleteData(String),
}

pub type Result<T> = std::result::Result<T, AnnealError>;
