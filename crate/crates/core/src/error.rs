use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An iterative method failed to converge or produced a non-finite value.
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("integer overflow: {0}")]
    Overflow(String),
    /// A configured size limit (degree cap, node cap) was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// A spectrum was asked for more eigenvalues than it was built with.
    #[error("stale spectrum: {0}")]
    Stale(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => { $crate::error::Error::Domain(format!($($arg)*)) };
}
pub(crate) use domain;
