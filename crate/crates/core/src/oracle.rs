use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use crate::distance::OrderedDistance;
use crate::error::Error;
use crate::handle::PointHandle;

/// Symmetric bivariate distance source with an evaluation counter.
///
/// The oracle is the single source of truth for distances. Symmetry is
/// enforced structurally: the underlying function is always called with the
/// endpoint ids in ascending order. Pairs retired via [`set_infinite`]
/// compare above every finite distance from then on.
///
/// Cloning is cheap and shares all state (counter, memo, retired pairs), so
/// derived distance functions can capture a clone of their base oracle.
///
/// [`set_infinite`]: DistanceOracle::set_infinite
#[derive(Clone)]
pub struct DistanceOracle {
    shared: Arc<OracleShared>,
}

struct OracleShared {
    func: Box<dyn Fn(u64, u64) -> f64 + Send + Sync>,
    evals: AtomicU64,
    memo: Option<Mutex<HashMap<(u64, u64), f64>>>,
    overrides: Mutex<HashSet<(u64, u64)>>,
    has_overrides: AtomicBool,
}

fn pair_key(a: PointHandle, b: PointHandle) -> (u64, u64) {
    let (x, y) = (a.id(), b.id());
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

impl DistanceOracle {
    /// Wraps a distance function, with memoization off.
    ///
    /// The function receives ids in ascending order and must be
    /// deterministic for every pair of live handles; a NaN result is
    /// rejected at the boundary and surfaces as
    /// [`Error::UnorderedDistance`].
    pub fn new<F>(func: F) -> DistanceOracle
    where
        F: Fn(u64, u64) -> f64 + Send + Sync + 'static,
    {
        Self::build(func, false)
    }

    /// Like [`new`](DistanceOracle::new) but caches every evaluated pair,
    /// trading up to quadratic space for replays that cost no evaluations.
    /// Intended for expensive distance functions; callers must not reuse a
    /// handle id for a different object while the memo is active.
    pub fn with_full_memo<F>(func: F) -> DistanceOracle
    where
        F: Fn(u64, u64) -> f64 + Send + Sync + 'static,
    {
        Self::build(func, true)
    }

    fn build<F>(func: F, memo: bool) -> DistanceOracle
    where
        F: Fn(u64, u64) -> f64 + Send + Sync + 'static,
    {
        DistanceOracle {
            shared: Arc::new(OracleShared {
                func: Box::new(func),
                evals: AtomicU64::new(0),
                memo: memo.then(|| Mutex::new(HashMap::new())),
                overrides: Mutex::new(HashSet::new()),
                has_overrides: AtomicBool::new(false),
            }),
        }
    }

    /// Evaluates the distance of a pair, counting one evaluation unless the
    /// answer came from the memo or from a retired-pair override.
    pub fn eval(&self, a: PointHandle, b: PointHandle) -> Result<OrderedDistance, Error> {
        assert!(a != b, "self-distance queried for handle {a}");
        self.lookup(a, b, true)
    }

    /// Evaluates without touching the counter. Used for bookkeeping reads
    /// (tour lengths, verification scans, derived oracles that delegate to
    /// a base metric) so that each consumed evaluation is counted exactly
    /// once, at the oracle the structure actually queries.
    pub fn raw(&self, a: PointHandle, b: PointHandle) -> Result<OrderedDistance, Error> {
        assert!(a != b, "self-distance queried for handle {a}");
        self.lookup(a, b, false)
    }

    fn lookup(&self, a: PointHandle, b: PointHandle, count: bool) -> Result<OrderedDistance, Error> {
        let key = pair_key(a, b);
        if self.shared.has_overrides.load(Ordering::Relaxed)
            && self.shared.overrides.lock().unwrap().contains(&key)
        {
            return Ok(OrderedDistance::INFINITY);
        }
        if let Some(memo) = &self.shared.memo {
            if let Some(&v) = memo.lock().unwrap().get(&key) {
                return Ok(OrderedDistance::finite(v));
            }
        }
        let v = (self.shared.func)(key.0, key.1);
        let d = OrderedDistance::try_from_f64(v).map_err(|_| Error::UnorderedDistance(a, b))?;
        if count {
            self.shared.evals.fetch_add(1, Ordering::Relaxed);
        }
        if let Some(memo) = &self.shared.memo {
            memo.lock().unwrap().insert(key, v);
        }
        Ok(d)
    }

    /// Retires a pair: every later evaluation of it returns
    /// [`OrderedDistance::INFINITY`]. Callers flip the pair here first, then
    /// ask the structure to repair its candidates via
    /// [`invalidate_pair`](crate::ClosestPairStructure::invalidate_pair).
    pub fn set_infinite(&self, a: PointHandle, b: PointHandle) {
        assert!(a != b, "cannot retire the self-pair of handle {a}");
        self.shared
            .overrides
            .lock()
            .unwrap()
            .insert(pair_key(a, b));
        self.shared.has_overrides.store(true, Ordering::Relaxed);
    }

    /// Number of underlying evaluations so far. Monotone; memo hits and
    /// retired-pair reads do not move it.
    pub fn eval_count(&self) -> u64 {
        self.shared.evals.load(Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::AtomicU64;

    fn handle(i: u64) -> PointHandle {
        PointHandle::new(i)
    }

    #[test]
    fn symmetric_by_construction() {
        // An asymmetric raw function still yields a symmetric oracle.
        let oracle = DistanceOracle::new(|a, b| (10 * a + b) as f64);
        let d1 = oracle.eval(handle(2), handle(7)).unwrap();
        let d2 = oracle.eval(handle(7), handle(2)).unwrap();
        assert_eq!(d1, d2);
        assert_eq!(d1.value(), 27.0);
    }

    #[test]
    fn counter_counts_underlying_evals_only() {
        let oracle = DistanceOracle::with_full_memo(|a, b| (a + b) as f64);
        assert_eq!(oracle.eval_count(), 0);
        oracle.eval(handle(0), handle(1)).unwrap();
        assert_eq!(oracle.eval_count(), 1);
        // Memo hit.
        oracle.eval(handle(1), handle(0)).unwrap();
        assert_eq!(oracle.eval_count(), 1);
        // Raw read is never counted.
        oracle.raw(handle(0), handle(2)).unwrap();
        assert_eq!(oracle.eval_count(), 1);
        oracle.eval(handle(0), handle(2)).unwrap();
        assert_eq!(oracle.eval_count(), 2);
    }

    #[test]
    fn retired_pairs_read_infinite_without_counting() {
        let oracle = DistanceOracle::new(|_, _| 1.0);
        oracle.set_infinite(handle(3), handle(4));
        assert!(oracle.eval(handle(4), handle(3)).unwrap().is_infinite());
        assert_eq!(oracle.eval_count(), 0);
        assert!(!oracle.eval(handle(3), handle(5)).unwrap().is_infinite());
        assert_eq!(oracle.eval_count(), 1);
    }

    #[test]
    fn nan_rejected_with_pair_diagnostic() {
        let oracle = DistanceOracle::new(|a, b| if (a, b) == (1, 2) { f64::NAN } else { 0.5 });
        assert!(oracle.eval(handle(0), handle(1)).is_ok());
        match oracle.eval(handle(2), handle(1)) {
            Err(Error::UnorderedDistance(a, b)) => {
                assert_eq!((a.id(), b.id()), (2, 1));
            }
            other => panic!("expected UnorderedDistance, got {other:?}"),
        }
    }

    #[test]
    fn clones_share_counter_and_overrides() {
        static CALLS: AtomicU64 = AtomicU64::new(0);
        let oracle = DistanceOracle::new(|a, b| {
            CALLS.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            (a * b) as f64
        });
        let clone = oracle.clone();
        clone.eval(handle(1), handle(2)).unwrap();
        assert_eq!(oracle.eval_count(), 1);
        oracle.set_infinite(handle(1), handle(2));
        assert!(clone.eval(handle(1), handle(2)).unwrap().is_infinite());
    }
}
