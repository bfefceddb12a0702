//! Dynamic closest-pair maintenance for arbitrary totally ordered distance
//! functions, with no geometric assumptions: six interchangeable backends
//! behind one structure contract, the driver algorithms that consume them
//! (agglomerative clustering, multi-fragment and cheapest-insertion TSP
//! construction, greedy matching), and seeded instance generators for
//! operation-count benchmarking.
//!
//! # Backends
//!
//! | kind | structure | space | update cost |
//! |------|-----------|-------|-------------|
//! | `bf` | brute force rescan | linear | quadratic query |
//! | `nh` | stored nearest neighbors | linear | linear insert, quadratic worst-case delete |
//! | `cl` | conga line (log-bounded partition) | linear | near-linear amortized |
//! | `mc` | MultiConga (no merging) | linear | near-linear in practice |
//! | `fp` | FastPair (one witness edge per point) | linear | near-linear in practice |
//! | `qt` | block-minima over the distance matrix | quadratic | linear, log for one pair |
//!
//! All backends answer through the same [`ClosestPairStructure`] trait and
//! agree with brute force on every report; they may differ only in which
//! of several tied pairs they name.
//!
//! # Example
//!
//! ```
//! use dynpair::{BackendKind, DistanceOracle, PointHandle, make_backend};
//!
//! let coords = [0.0_f64, 9.0, 10.0];
//! let oracle = DistanceOracle::new(move |a, b| (coords[a as usize] - coords[b as usize]).abs());
//! let mut fp = make_backend(BackendKind::FastPair, None);
//! for i in 0..3 {
//!     fp.insert(&oracle, PointHandle::new(i)).unwrap();
//! }
//! let pair = fp.closest_pair(&oracle).unwrap().unwrap();
//! assert_eq!((pair.a.id(), pair.b.id()), (1, 2));
//!
//! // Retire the pair: it is never reported again.
//! oracle.set_infinite(pair.a, pair.b);
//! fp.invalidate_pair(&oracle, pair.a, pair.b).unwrap();
//! let next = fp.closest_pair(&oracle).unwrap().unwrap();
//! assert_eq!((next.a.id(), next.b.id()), (0, 1));
//! ```

pub mod apps;
pub mod baselines;
pub mod conga_line;
pub mod conga_variants;
mod distance;
mod error;
pub mod generators;
mod handle;
mod oracle;
mod structure;
pub mod quadtree;

pub use distance::OrderedDistance;
pub use error::Error;
pub use handle::{PairReport, PointHandle};
pub use oracle::DistanceOracle;
pub use structure::{make_backend, BackendKind, ClosestPairStructure};
