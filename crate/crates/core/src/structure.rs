use core::fmt;
use core::str::FromStr;

use crate::baselines::{BruteForce, NeighborHeuristic};
use crate::conga_line::CongaLine;
use crate::conga_variants::{FastPair, MultiConga};
use crate::error::Error;
use crate::handle::{PairReport, PointHandle};
use crate::oracle::DistanceOracle;
use crate::quadtree::Quadtree;

/// The uniform contract every closest-pair backend implements.
///
/// A structure never owns the oracle; the caller passes the same oracle to
/// every operation on an instance. Instances follow a single-writer
/// discipline: no two operations run concurrently on the same instance.
pub trait ClosestPairStructure {
    /// Makes `x` live. Fails on a duplicate handle, or when the oracle
    /// produced an unorderable value while the structure computed
    /// candidates for `x`.
    fn insert(&mut self, oracle: &DistanceOracle, x: PointHandle) -> Result<(), Error>;

    /// Makes `x` dead; subsequent reports reflect the remaining set.
    fn delete(&mut self, oracle: &DistanceOracle, x: PointHandle) -> Result<(), Error>;

    /// Reports a pair of minimum distance, or `None` with fewer than two
    /// live objects. Ties resolve to the first candidate in the backend's
    /// documented scan order.
    fn closest_pair(&self, oracle: &DistanceOracle) -> Result<Option<PairReport>, Error>;

    /// Repairs internal candidates after the caller retired the pair
    /// `(a, b)` on the oracle (see [`DistanceOracle::set_infinite`]). The
    /// pair is never reported again; all other pairs are unaffected.
    fn invalidate_pair(
        &mut self,
        oracle: &DistanceOracle,
        a: PointHandle,
        b: PointHandle,
    ) -> Result<(), Error>;

    /// Number of live objects.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether `x` is live.
    fn contains(&self, x: PointHandle) -> bool;

    /// Populates an empty structure with an initial object set. Backends
    /// with a dedicated batch construction override this; the default is an
    /// insert loop.
    fn bulk_init(&mut self, oracle: &DistanceOracle, points: &[PointHandle]) -> Result<(), Error> {
        for &p in points {
            self.insert(oracle, p)?;
        }
        Ok(())
    }
}

/// Selector for the six backends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BackendKind {
    BruteForce,
    NeighborHeuristic,
    CongaLine,
    MultiConga,
    FastPair,
    Quadtree,
}

impl BackendKind {
    pub const ALL: [BackendKind; 6] = [
        BackendKind::BruteForce,
        BackendKind::NeighborHeuristic,
        BackendKind::CongaLine,
        BackendKind::MultiConga,
        BackendKind::FastPair,
        BackendKind::Quadtree,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::BruteForce => "bf",
            BackendKind::NeighborHeuristic => "nh",
            BackendKind::CongaLine => "cl",
            BackendKind::MultiConga => "mc",
            BackendKind::FastPair => "fp",
            BackendKind::Quadtree => "qt",
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<BackendKind, Error> {
        match s {
            "bf" => Ok(BackendKind::BruteForce),
            "nh" => Ok(BackendKind::NeighborHeuristic),
            "cl" => Ok(BackendKind::CongaLine),
            "mc" => Ok(BackendKind::MultiConga),
            "fp" => Ok(BackendKind::FastPair),
            "qt" => Ok(BackendKind::Quadtree),
            other => Err(Error::BadInstance(format!("unknown backend '{other}'"))),
        }
    }
}

/// Instantiates a backend. `qt_capacity` overrides the quadtree's point
/// capacity and is ignored by the other kinds.
pub fn make_backend(
    kind: BackendKind,
    qt_capacity: Option<usize>,
) -> Box<dyn ClosestPairStructure + Send + Sync> {
    match kind {
        BackendKind::BruteForce => Box::new(BruteForce::new()),
        BackendKind::NeighborHeuristic => Box::new(NeighborHeuristic::new()),
        BackendKind::CongaLine => Box::new(CongaLine::new()),
        BackendKind::MultiConga => Box::new(MultiConga::new()),
        BackendKind::FastPair => Box::new(FastPair::new()),
        BackendKind::Quadtree => match qt_capacity {
            Some(cap) => Box::new(Quadtree::with_capacity(cap)),
            None => Box::new(Quadtree::new()),
        },
    }
}
