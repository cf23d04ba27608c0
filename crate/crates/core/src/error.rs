use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Bayes update whose normalizing denominator vanished.
    #[error("degenerate belief update: prior p0={prior} against likelihood ({l0}, {l1})")]
    DegenerateUpdate { prior: f64, l0: f64, l1: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
