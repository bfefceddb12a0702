use core::fmt;

use crate::handle::PointHandle;

/// Crate-wide error type for structure operations, application drivers and
/// instance construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Insert of a handle that is already live.
    DuplicateHandle(PointHandle),
    /// Operation on a handle that is not live.
    UnknownHandle(PointHandle),
    /// A pair operation was given the same handle twice.
    SelfPair(PointHandle),
    /// The distance source produced a value outside the total order (NaN).
    UnorderedDistance(PointHandle, PointHandle),
    /// A capacity-limited backend was asked to grow past its configured cap.
    CapacityExceeded { capacity: usize, requested: usize },
    /// Path construction was seeded with an empty subset.
    EmptySubset,
    /// An application driver needs more points than it was given.
    TooFewPoints { needed: usize, got: usize },
    /// Recurrence linkages need finite numeric distances between leaves.
    NonFiniteClusterDistance(PointHandle, PointHandle),
    /// Instance specification rejected (unknown kind/metric combination, …).
    BadInstance(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DuplicateHandle(h) => write!(f, "handle {h} is already live"),
            Error::UnknownHandle(h) => write!(f, "handle {h} is not live"),
            Error::SelfPair(h) => write!(f, "pair operation given handle {h} twice"),
            Error::UnorderedDistance(a, b) => {
                write!(f, "distance of pair ({a}, {b}) is not orderable (NaN)")
            }
            Error::CapacityExceeded {
                capacity,
                requested,
            } => write!(
                f,
                "structure capacity {capacity} exceeded (requested {requested})"
            ),
            Error::EmptySubset => write!(f, "path construction needs a non-empty subset"),
            Error::TooFewPoints { needed, got } => {
                write!(f, "need at least {needed} points, got {got}")
            }
            Error::NonFiniteClusterDistance(a, b) => write!(
                f,
                "recurrence linkage needs finite distances, but d({a}, {b}) is infinite"
            ),
            Error::BadInstance(msg) => write!(f, "invalid instance spec: {msg}"),
        }
    }
}

impl std::error::Error for Error {}
