use thiserror::Error;

/// Failure modes of the certification engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A tolerance or search bound could not be met; the caller must not
    /// claim anything beyond the fallback result.
    #[error("abstain: {0}")]
    Abstain(String),

    /// The probability box has no point in the feasible region.
    #[error("infeasible probabilities: P_A = {pa}, Q_A = {qa}")]
    Infeasible { pa: f64, qa: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

pub(crate) fn abstain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Abstain(msg.into()))
}
