use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Caller-supplied data violates a precondition (lengths, domains, ranges).
    #[error("invalid input: {0}")]
    Input(String),
    /// A floating-point computation produced a non-finite or degenerate value.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// A filter or experiment configuration is inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// An operation needs state that is not present (e.g. oracle coefficients).
    #[error("missing state: {0}")]
    State(String),
    /// The fixed-point or bisection solver could not bracket a root.
    #[error("solver failure: {0}")]
    Solver(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub(crate) fn state(msg: impl Into<String>) -> Self {
        Error::State(msg.into())
    }
}
