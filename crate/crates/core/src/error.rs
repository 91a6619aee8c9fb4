use thiserror::Error;

/// Errors raised by the solvers, estimators and samplers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("no bracket: {0}")]
    NoBracket(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("rejection envelope violated: {0}")]
    EnvelopeError(String),
    #[error("particle weights collapsed: {0}")]
    WeightCollapse(String),
    #[error("no crossover: {0}")]
    NoCrossover(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
