use thiserror::Error;

/// Errors produced by the model, solver and estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A tuning parameter (grid size, replicate count, delta, ...) is unusable.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// The requested computation exceeds what the method supports.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// A support function breakpoint violates the representation invariants.
    #[error("invalid breakpoint {index} of {function}: {reason}")]
    Breakpoint {
        function: String,
        index: usize,
        reason: String,
    },

    /// Malformed issue or pivotality configuration.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn parameter<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
