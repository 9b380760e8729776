use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("unsupported boundary: {0}")]
    UnsupportedBoundary(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("numerical failure: {message} (residual {residual:.3e})")]
    Numerical { message: String, residual: f64 },
    #[error("fit error: {0}")]
    Fit(String),
    #[error("insufficient time resolution: {0}")]
    Resolution(String),
    #[error("invalid argument: {0}")]
    Argument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
