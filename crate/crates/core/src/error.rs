use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// Player and position indices carried by variants are 1-based so they can be
/// shown to users verbatim.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{field}[{index}] must be strictly positive and finite (got {value})")]
    NonPositiveEntry {
        field: &'static str,
        index: usize,
        value: f64,
    },
    #[error("ctrs must be non-increasing: ctrs[{index}] < ctrs[{}]", index + 1)]
    CtrsNotSorted { index: usize },
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("instance has no players")]
    Empty,
    #[error("bid at {location} must be finite and non-negative (got {value})")]
    InvalidBid { location: String, value: f64 },
    #[error("{mechanism} expects a {expected} bid profile")]
    ProfileShapeMismatch {
        mechanism: &'static str,
        expected: &'static str,
    },
    #[error("profile violates the no-over assumption for player(s) {players:?}")]
    ProfileNotNoOverCompliant { players: Vec<usize> },
    #[error("n = {n} exceeds the limit of {max} for {what}")]
    TooLarge {
        n: usize,
        max: usize,
        what: &'static str,
    },
    #[error("no equilibrium found on the grid")]
    NoEquilibriumFound,
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
