use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A risk-measure integral is infinite.
    #[error("divergent integral: {0}")]
    Divergent(String),
    /// A contract parameter vector violates its admissible domain.
    #[error("inadmissible contract: {0}")]
    Inadmissible(String),
    /// An exhaustive oracle was asked for a problem beyond its enumeration limits.
    #[error("size limit exceeded: {0}")]
    Size(String),
    /// A scenario or configuration is inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A numerical search failed to produce a finite optimum.
    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
