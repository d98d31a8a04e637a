use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("stoquasticity violated: {0}")]
    NotStoquastic(String),
    #[error("numeric fault: {0}")]
    Numeric(String),
    #[error("system too large for exhaustive treatment: {n} sites (limit {limit})")]
    TooLarge { n: usize, limit: usize },
    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("degenerate context {context:?} for conditional {site}: one spin value has zero weight")]
    DegenerateContext { site: usize, context: Vec<i8> },
    #[error("checkpoint format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
