use thiserror::Error;

/// Error type shared by the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A configured memory or enumeration cap would be exceeded.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// The Merlin proof list grew past its cap; raise eps or the k budget.
    #[error("proof space overflow: {0}")]
    ProofSpaceOverflow(String),

    /// Exact certification of a constructed polynomial failed. This indicates
    /// a bug in the construction, not bad input.
    #[error("internal certification failure: {0}")]
    Certification(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
