use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix has rank {rank} but {cols} columns")]
    NotFullRank { rank: usize, cols: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("regime too large for exhaustive evaluation: {0}")]
    RegimeTooLarge(String),
    #[error("{got} reconstruction constraints exceed the secrecy threshold {max}")]
    TooManyConstraints { got: usize, max: usize },
    #[error("reconstruction constraints are inconsistent")]
    Infeasible,
    #[error("secrecy threshold {threshold} of the seed encoding is below sigma = {sigma}")]
    ThresholdViolation { threshold: usize, sigma: usize },
    #[error("stream exhausted: needed {needed} bits, {available} available")]
    StreamExhausted { needed: usize, available: usize },
    #[error("not found: {0}")]
    NotFound(String),
    #[error("infeasible parameters: {0}")]
    InfeasibleParams(String),
    #[error("log of {0} is not an integer")]
    NonIntegralLog(f64),
    #[error("selector violation: {0}")]
    SelectorViolation(String),
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("distribution tables are over different outcome spaces")]
    SpaceMismatch,
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
