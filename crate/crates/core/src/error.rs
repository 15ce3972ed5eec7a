//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("duplicate id `{id}` ({kind})")]
    DuplicateId { id: String, kind: &'static str },

    #[error(
        "span [{start}, {end}) out of bounds for sentence `{sentence_id}` \
         (rater `{rater_id}`, valid range 0..{len})"
    )]
    SpanOutOfBounds {
        rater_id: String,
        sentence_id: String,
        start: usize,
        end: usize,
        len: usize,
    },

    #[error("annotation references unknown sentence `{sentence_id}` (rater `{rater_id}`)")]
    DanglingSentence {
        rater_id: String,
        sentence_id: String,
    },

    #[error("sentence `{id}` has empty text after normalization")]
    EmptyText { id: String },

    #[error("vote count mismatch: got {got} votes for {expected} raters")]
    VoteCountMismatch { got: usize, expected: usize },

    #[error("annotations reference mixed sentences: `{first}` and `{second}`")]
    MixedSentences { first: String, second: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error(
        "agreement coefficient undefined: all pairable values share one label \
         (pass the degenerate-is-one flag to map this case to 1.0)"
    )]
    UndefinedAlpha,

    #[error("insufficient data for agreement: {pairable} pairable values (need at least 2)")]
    InsufficientData { pairable: usize },

    #[error("incomplete reliability data: {0}")]
    IncompleteMatrix(String),

    #[error("headlines reference outlets without a leaning entry: {outlets:?}")]
    UnknownOutlets { outlets: Vec<String> },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite gradient in {component} at index {index} (value {value})")]
    NonFiniteGradient {
        component: &'static str,
        index: usize,
        value: f64,
    },

    #[error("empty {0} split")]
    EmptySplit(&'static str),

    #[error("class {class} has {count} members, fewer than k = {k} folds")]
    ClassTooSmall { class: u8, count: usize, k: usize },

    #[error("length mismatch: {left} predictions vs {right} golds")]
    LengthMismatch { left: usize, right: usize },

    #[error("fold {fold} trainer failed: {source}")]
    FoldTrainer {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// An I/O failure tagged with the path it happened on.
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
