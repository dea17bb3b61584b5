//! Crate-wide error type.
//!
//! Variants are grouped so that callers (in particular the CLI) can map them
//! onto coarse failure classes: input/parse problems, domain lookups, and
//! degenerate computations that need operator intervention.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error reading {context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    /// A malformed input line in strict mode. `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("no events in input")]
    NoEvents,

    #[error("not enough users: {required} required for {group_count} groups of {group_size}, only {available} available")]
    NotEnoughUsers {
        required: usize,
        available: usize,
        group_count: usize,
        group_size: usize,
    },

    #[error("unknown genre: {0}")]
    UnknownGenre(String),

    #[error("genre {genre} was never listened to by user {user}")]
    UnknownGenreForUser { user: String, genre: String },

    #[error("user {0} has no listening history")]
    ColdUser(String),

    #[error("unknown algorithm: {0}")]
    UnknownAlgorithm(String),

    /// Fewer than two populated gap bins: a decay exponent cannot be
    /// regressed. Supply the exponent manually instead.
    #[error("degenerate decay fit: {populated_bins} populated gap bin(s), need at least 2; supply the decay exponent manually")]
    DegenerateDecayFit { populated_bins: usize },

    #[error("degenerate decay fit: regression slope is zero (flat relistening counts); supply the decay exponent manually")]
    FlatDecayFit,

    #[error("degenerate significance test: {0}")]
    DegenerateStatistic(String),

    #[error("empty score set: {0}")]
    EmptyScores(String),

    #[error("non-finite score encountered: {0}")]
    NonFiniteScore(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
