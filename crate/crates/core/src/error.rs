use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("walk symbol {0} is outside {{1, 2, 3}}")]
    InvalidSymbol(u8),

    #[error("{what}: expected {expected} bytes, got {got}")]
    Length {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{what}: word at byte offset {offset} is not below p")]
    FieldOverflow { what: &'static str, offset: usize },

    #[error("invalid parameter set: {0}")]
    Params(String),

    #[error("unknown parameter set {0:?}")]
    UnknownParamSet(String),

    #[error("chain range: start {start} + steps {steps} exceeds w - 1 = {max}")]
    ChainRange { start: u32, steps: u32, max: u32 },

    #[error("index out of range: {0}")]
    IndexRange(String),

    #[error("statistical test needs at least {needed} bits, got {got}")]
    TooFewBits { needed: usize, got: usize },

    #[error("statistical test precondition failed: {0}")]
    Precondition(String),

    #[error("generator constants failed self-check: {0}")]
    Constants(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
