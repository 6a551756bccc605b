use thiserror::Error;

/// Errors raised by the kernel, the samplers and the front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A quadrature or iteration did not converge within its budget.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// The bisection phase of a guarded Newton inversion could not certify
    /// a basin of quadratic convergence within the allowed number of steps.
    #[error("certified failure after {steps} bisection steps: {what}")]
    Certified { what: String, steps: u32 },
    /// A caller-supplied function broke its contract.
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn numeric(msg: impl Into<String>) -> Error {
    Error::Numeric(msg.into())
}
