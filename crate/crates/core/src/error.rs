use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("slot {0} is not occupied")]
    InvalidSlot(usize),
    #[error("cluster index corrupted: {0}")]
    IndexCorruption(String),
    #[error("not ready: {0}")]
    NotReady(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numeric fault: {0}")]
    NumericFault(String),
    #[error("environment fault: {0}")]
    Env(String),
}

impl Error {
    /// True for errors caused by bad configuration or input rather than a
    /// fault during execution.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::InvalidInput(_))
    }
}
