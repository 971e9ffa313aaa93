use thiserror::Error;

/// Errors raised by the estimation pipeline and its components.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sample size error: {0}")]
    Size(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("capability error: {0}")]
    Capability(String),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("diagnostics failure: {0}")]
    Diagnostics(String),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
