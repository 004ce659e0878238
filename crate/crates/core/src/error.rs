use thiserror::Error;

/// Errors raised by the cone-harmonic kernels.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the region where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent or missing configuration (link/dimension mismatch, grid mismatch, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Input data violates an invariant (negative eigenvalue, nonmonotone table, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// The requested operation is not supported for this kind of object.
    #[error("capability error: {0}")]
    Capability(String),

    #[error("index error: {0}")]
    Index(String),

    /// Integration or quadrature failed to converge.
    #[error("numerical error at r = {at}: {message}")]
    Numerical { at: f64, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numerical(at: f64, msg: impl Into<String>) -> Self {
        Error::Numerical {
            at,
            message: msg.into(),
        }
    }
}
