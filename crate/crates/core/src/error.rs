use thiserror::Error;

/// Errors produced by the codec, decoders and density utilities.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("constraints are inconsistent")]
    Inconsistent,
    #[error("solution set of size 2^{dimension} exceeds limit {limit}")]
    LimitExceeded { dimension: usize, limit: u64 },
    #[error("basis vectors are linearly dependent")]
    DependentBasis,
    #[error("conflicting values for position {position}")]
    ConflictingSample { position: u64 },
    #[error("position {position} out of range (bound {bound})")]
    PositionOutOfRange { position: u64, bound: u64 },
    #[error("sample set is empty")]
    NoSamples,
    #[error("need at least {need} samples, have {have}")]
    InsufficientSamples { have: usize, need: u64 },
    #[error("delta out of range")]
    InvalidDelta,
    #[error("source prefix has {have} bits, need {need}")]
    PrefixTooShort { have: usize, need: usize },
    #[error("block {block} exceeds the cap of {cap}")]
    BlockTooLarge { block: usize, cap: usize },
    #[error("no block meets the density threshold")]
    NoGoodBlocks,
    #[error("requested range ends at {end}, beyond horizon {horizon}")]
    BeyondHorizon { end: u64, horizon: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("search budget exhausted")]
    BudgetExhausted,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
