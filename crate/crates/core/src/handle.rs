use core::fmt;

use crate::distance::OrderedDistance;

/// Stable external identifier for an object currently held by a structure.
///
/// Handles are opaque tokens chosen by the caller; they are never reassigned
/// to a different object by the library, even when a backend renumbers its
/// internal slots. A handle is *live* from its insert until its delete.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointHandle(u64);

impl PointHandle {
    pub fn new(id: u64) -> PointHandle {
        PointHandle(id)
    }

    pub fn id(self) -> u64 {
        self.0
    }
}

impl From<u64> for PointHandle {
    fn from(id: u64) -> PointHandle {
        PointHandle(id)
    }
}

impl fmt::Display for PointHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A closest-pair answer: two live handles and their distance, which equals
/// the minimum over all current pairs. When several pairs tie, whichever
/// the backend encountered first in its documented scan order is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairReport {
    pub a: PointHandle,
    pub b: PointHandle,
    pub d: OrderedDistance,
}

impl PairReport {
    /// Builds a report with endpoints normalized so that `a < b`.
    pub fn new(x: PointHandle, y: PointHandle, d: OrderedDistance) -> PairReport {
        if x <= y {
            PairReport { a: x, b: y, d }
        } else {
            PairReport { a: y, b: x, d }
        }
    }
}
