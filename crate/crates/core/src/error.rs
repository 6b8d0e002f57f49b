use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed input data (interval lists, meshes, specs).
    #[error("validation error: {0}")]
    Validation(String),
    /// A numerical procedure did not reach its tolerance.
    #[error("numeric error: {message} (best estimate {estimate:e})")]
    Numeric { message: String, estimate: f64 },
    /// A problem would exceed a configured size limit.
    #[error("resource error: {0}")]
    Resource(String),
    /// Ray casting or sampling hit persistent geometric degeneracy.
    #[error("geometry error: {0}")]
    Geometry(String),
    /// The operation is not supported for this kind of input.
    #[error("capability error: {0}")]
    Capability(String),
    /// Least-squares fit could not be performed.
    #[error("fit error: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
