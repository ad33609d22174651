use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A gamma-family function was evaluated at a non-positive integer.
    #[error("pole of the gamma function at z = {0}")]
    Pole(i64),

    /// The requested absolute quantity is infinite for this configuration.
    #[error("divergent configuration: {0}")]
    Divergent(String),

    /// A series could not be summed to the requested tolerance.
    #[error("series did not converge after {terms} terms (achieved bound {achieved:e})")]
    Convergence { terms: u64, achieved: f64 },

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge (achieved error estimate {achieved:e})")]
    Quadrature { achieved: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
