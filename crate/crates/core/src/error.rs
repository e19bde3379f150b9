use thiserror::Error;

/// Errors raised by model construction, synthesis, analysis and statistics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Features such as band percentages are undefined for a spectrum with no power.
    #[error("undefined features: {0}")]
    UndefinedFeatures(String),

    /// Paired differences with zero spread; the t statistic does not exist.
    #[error("degenerate test: {0}")]
    DegenerateTest(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
