use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error(
        "state chain is reducible: {closed_classes} closed classes, stationary law is not unique"
    )]
    Reducible { closed_classes: usize },

    #[error("state {0} has zero stationary mass")]
    ZeroStationaryMass(usize),

    #[error("block length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("oracle cap exceeded: {needed} table entries required, cap is {cap}")]
    CapExceeded { needed: u128, cap: u128 },

    #[error("conditioning event has probability zero at index {0}")]
    ImpossibleEvent(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown preset or malformed process spec: {0}")]
    BadSpec(String),

    #[error("config: {0}")]
    Config(String),

    #[error("corrupt compressed block: {0}")]
    CorruptBlock(String),

    #[error("decode failure: {0}")]
    DecodeFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
