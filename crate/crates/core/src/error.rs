use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet size must be between 2 and {max}, got {got}")]
    InvalidAlphabet { got: usize, max: usize },
    #[error("alphabet mismatch: {left} vs {right}")]
    AlphabetMismatch { left: usize, right: usize },
    #[error("symbol {symbol} is outside the alphabet of size {size}")]
    InvalidSymbol { symbol: u8, size: usize },
    #[error("period word must be nonempty")]
    EmptyPeriod,
    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("invalid A-sequence: {0}")]
    InvalidSequence(String),
    #[error("A-sequence is not lacunary and cannot be repaired: {0}")]
    NotLacunary(String),
    #[error("A-sequence is not super-continuous (A_(n+1)/A_n does not tend to 0)")]
    NotSuperContinuous,
    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    EpsilonOutOfRange(String),
    #[error("no recurrence of depth {depth} found within horizon {horizon}")]
    HorizonTooSmall { depth: usize, horizon: usize },
    #[error("table of {entries} entries exceeds the limit of {limit}")]
    TableTooLarge { entries: u128, limit: u128 },
    #[error("oracle enumeration of {alphabet}^{period} words exceeds the guard")]
    OracleGuard { alphabet: usize, period: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("certificate failure: {0}")]
    Certificate(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
