use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tile dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("bit index {0} out of range [0, 16)")]
    BitOutOfRange(u32),

    #[error("unsupported conversion from {from} to {to}")]
    UnsupportedConversion { from: &'static str, to: &'static str },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("block {block} failed: {source}")]
    BlockFailed {
        block: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors raised by violating an operation's preconditions.
    pub fn is_contract_violation(&self) -> bool {
        match self {
            Error::DimensionMismatch(_)
            | Error::LengthMismatch { .. }
            | Error::BitOutOfRange(_)
            | Error::InvalidConfig(_)
            | Error::InvalidArgument(_) => true,
            Error::BlockFailed { source, .. } => source.is_contract_violation(),
            _ => false,
        }
    }
}
