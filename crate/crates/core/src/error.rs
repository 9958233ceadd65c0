use thiserror::Error;

/// Errors raised by the library. The CLI maps these onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A query exceeds the truncation caps the object was built with.
    #[error("cap error: {0}")]
    Cap(String),
    /// Instance too large for a desk-scale routine.
    #[error("size error: {0}")]
    Size(String),
    /// Invalid experiment or CLI configuration.
    #[error("config error: {0}")]
    Config(String),
    /// Numerical breakdown (degenerate variance, exhausted rejection sampling, ...).
    #[error("numerical error: {0}")]
    Numerical(String),
    /// Too many stabilization radii could not be confirmed inside the window.
    #[error("censoring abort: {0}")]
    Censored(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
