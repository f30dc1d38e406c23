use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("formula out of domain: {0}")]
    OutOfDomain(String),

    /// |E(T)|² underflowed, so the effective decay rate diverges.
    #[error("survival probability vanishes at tau = {tau:e} (|E|^2 = {prob:e})")]
    SurvivalZero { tau: f64, prob: f64 },

    #[error("integrator failed at tau = {tau:e}: {reason}")]
    Integration { tau: f64, reason: String },

    #[error("bath discretization not converged: M-doubling changed E by {change:e} > {tolerance:e}")]
    NotConverged { change: f64, tolerance: f64 },

    #[error("invalid two-qubit state: {0}")]
    InvalidState(String),

    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("at {context}: {source}")]
    At {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps an error with the grid point or interval it came from.
    pub fn at(self, context: impl Into<String>) -> Self {
        Error::At {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
