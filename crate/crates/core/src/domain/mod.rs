//! The countable domain, its canonical indexing, and the symbolic support
//! algebra behind every hypothesis.

mod element;
mod finite;
mod support;

pub use element::{canonical_index, deindex, CanonicalIndex, Element, MAX_ABS_INT};
pub use finite::ElementSet;
pub use support::{
    contains, intersection_is_infinite, subset_query, Hypothesis, Ray, SupportBuilder,
    SupportIter, SupportSpec,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DomainError {
    #[error("canonical indices and prefix lengths start at 1")]
    ZeroIndex,
    #[error("count must be at least 1")]
    ZeroCount,
    #[error("marker level must be at least 1")]
    MarkerLevelZero,
    #[error("integer {0} is outside the indexable range")]
    IntOutOfRange(i64),
    #[error("cannot parse element from {0:?}")]
    Parse(String),
    #[error("support would be finite: add a ray or the marker family")]
    FiniteSupport,
    #[error("element {0} is both included and excluded")]
    IncludedAndExcluded(Element),
    #[error("invalid separation hypothesis: {0}")]
    Separation(String),
}
