use thiserror::Error;

/// Errors raised by the loop model library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-range input.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A vertex that should belong to a domain does not.
    #[error("vertex {0} is not in the domain")]
    NotInDomain(String),

    /// An edge set or polygon is not contained in the domain.
    #[error("not contained in the domain: {0}")]
    NotContained(String),

    /// A vertex sequence or edge set does not describe a valid polygon.
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    /// Model parameters must be nonnegative.
    #[error("negative model parameter: {0}")]
    NegativeParameter(String),

    /// A configured resource cap would be exceeded.
    #[error("resource cap exceeded: {what} is {actual}, cap is {cap}")]
    SizeCap {
        what: &'static str,
        actual: usize,
        cap: usize,
    },

    /// Removal-bound inputs do not satisfy the occurrence precondition.
    #[error("polygon has {found} occurrences of the pattern, at least {required} required")]
    OccurrencePrecondition { found: usize, required: usize },

    /// The threshold equation has no root in the search bracket.
    #[error("threshold equation unsolvable: {0}")]
    Unsolvable(String),

    /// A table of counts lacks an entry needed by a tail sum.
    #[error("missing count for N = {0}")]
    MissingCount(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
