use thiserror::Error;

/// Errors raised while parsing, validating or solving packing instances.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("structural error: {0}")]
    Structure(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("duplicate city {0} in tour")]
    DuplicateCity(usize),

    /// Travel speed on the leg leaving the given tour position (0-based) is not positive.
    #[error("nonpositive travel speed {speed} on the leg leaving tour position {position}")]
    NonPositiveSpeed { position: usize, speed: f64 },

    #[error("scoring error: {0}")]
    Scoring(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("instance has {items} items; exhaustive search is capped at {cap}")]
    TooManyItems { items: usize, cap: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
