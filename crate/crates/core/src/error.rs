use thiserror::Error;

/// Errors raised by the reliability kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero distance between transmitter and receiver")]
    ZeroDistance,
    #[error("divergent integrand scale: path loss exponent must exceed 1 (got {0})")]
    DivergentExponent(f64),
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },
    #[error("receiver must lie on the horizontal road")]
    VerticalReceiver,
    #[error("grid index {k} outside 1..={m_e}")]
    GridIndex { k: usize, m_e: usize },
    #[error("scenario failed validation: {0}")]
    InvalidScenario(String),
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
