use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate modulus: generator must have degree >= 1")]
    DegenerateModulus,
    #[error("polynomial degree {0} outside the supported range 1..=32")]
    DegreeOutOfRange(u32),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("config mismatch: expected {expected:#018x}, found {found:#018x}")]
    ConfigMismatch { expected: u64, found: u64 },
    #[error("empty token")]
    EmptyToken,
    #[error("cleanup memory has no entries")]
    EmptyVocabulary,
    #[error("ambiguous readout: {tokens:?} tie with {votes} block votes each")]
    TiedWinner { tokens: Vec<String>, votes: usize },
    #[error("duplicate token `{0}`")]
    DuplicateToken(String),
    #[error("unknown token `{0}`")]
    UnknownToken(String),
    #[error("bundle is empty")]
    EmptyBundle,
    #[error("block {0} is already occupied")]
    BlockOccupied(usize),
    #[error("block index {index} out of range for {count} blocks")]
    BlockOutOfRange { index: usize, count: usize },
    #[error("duplicate assertion: {0}")]
    DuplicateAssertion(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
