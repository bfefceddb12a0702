//! The two reference backends everything else is measured against: brute
//! force recomputation and the stored-nearest-neighbor heuristic.

use std::collections::HashMap;

use crate::distance::OrderedDistance;
use crate::error::Error;
use crate::handle::{PairReport, PointHandle};
use crate::oracle::DistanceOracle;
use crate::structure::ClosestPairStructure;

/// Brute force: stores only the live set and rescans all pairs on every
/// query. With memoization off, one query costs exactly `C(n, 2)`
/// evaluations. Scan order (and therefore tie resolution) follows the live
/// slot order: insertion order with swap-remove holes.
pub struct BruteForce {
    live: Vec<PointHandle>,
    slot: HashMap<u64, usize>,
}

impl BruteForce {
    pub fn new() -> BruteForce {
        BruteForce {
            live: Vec::new(),
            slot: HashMap::new(),
        }
    }
}

impl Default for BruteForce {
    fn default() -> Self {
        Self::new()
    }
}

impl ClosestPairStructure for BruteForce {
    fn insert(&mut self, _oracle: &DistanceOracle, x: PointHandle) -> Result<(), Error> {
        if self.slot.contains_key(&x.id()) {
            return Err(Error::DuplicateHandle(x));
        }
        self.slot.insert(x.id(), self.live.len());
        self.live.push(x);
        Ok(())
    }

    fn delete(&mut self, _oracle: &DistanceOracle, x: PointHandle) -> Result<(), Error> {
        let slot = self.slot.remove(&x.id()).ok_or(Error::UnknownHandle(x))?;
        self.live.swap_remove(slot);
        if let Some(moved) = self.live.get(slot) {
            self.slot.insert(moved.id(), slot);
        }
        Ok(())
    }

    fn closest_pair(&self, oracle: &DistanceOracle) -> Result<Option<PairReport>, Error> {
        let mut best: Option<PairReport> = None;
        for (i, &a) in self.live.iter().enumerate() {
            for &b in &self.live[i + 1..] {
                let d = oracle.eval(a, b)?;
                if best.as_ref().is_none_or(|r| d < r.d) {
                    best = Some(PairReport::new(a, b, d));
                }
            }
        }
        Ok(best)
    }

    fn invalidate_pair(
        &mut self,
        _oracle: &DistanceOracle,
        a: PointHandle,
        b: PointHandle,
    ) -> Result<(), Error> {
        check_pair(&self.slot, a, b)
        // Nothing cached; the next query rescans through the oracle.
    }

    fn len(&self) -> usize {
        self.live.len()
    }

    fn contains(&self, x: PointHandle) -> bool {
        self.slot.contains_key(&x.id())
    }
}

fn check_pair(slot: &HashMap<u64, usize>, a: PointHandle, b: PointHandle) -> Result<(), Error> {
    if a == b {
        return Err(Error::SelfPair(a));
    }
    if !slot.contains_key(&a.id()) {
        return Err(Error::UnknownHandle(a));
    }
    if !slot.contains_key(&b.id()) {
        return Err(Error::UnknownHandle(b));
    }
    Ok(())
}

/// Per-point record of a true nearest neighbor.
///
/// `dist` always equals the oracle's current answer for the pair, and
/// `neighbor` is a genuine nearest neighbor of `owner` among live objects
/// (unlike FastPair's witness entries).
#[derive(Debug, Clone, Copy)]
pub struct NeighborEntry {
    pub owner: PointHandle,
    pub neighbor: PointHandle,
    pub dist: OrderedDistance,
}

/// The stored-nearest-neighbor heuristic: each point remembers its nearest
/// neighbor, closest pairs are read off by scanning the entries. Inserts
/// are one full scan; deleting a point that is neighbor to `k` others costs
/// `k` rescans, which degenerates to quadratic time per update on hub-like
/// metrics.
pub struct NeighborHeuristic {
    live: Vec<PointHandle>,
    slot: HashMap<u64, usize>,
    // Parallel to `live`; None only while fewer than two objects are live.
    entries: Vec<Option<(PointHandle, OrderedDistance)>>,
}

impl NeighborHeuristic {
    pub fn new() -> NeighborHeuristic {
        NeighborHeuristic {
            live: Vec::new(),
            slot: HashMap::new(),
            entries: Vec::new(),
        }
    }

    /// Current entries, for inspection in tests and the harness.
    pub fn entries(&self) -> Vec<NeighborEntry> {
        self.live
            .iter()
            .zip(&self.entries)
            .filter_map(|(&owner, entry)| {
                entry.map(|(neighbor, dist)| NeighborEntry {
                    owner,
                    neighbor,
                    dist,
                })
            })
            .collect()
    }

    /// Full scan recomputing the entry of the point at `slot`: the nearest
    /// live neighbor in slot order, first-encountered on ties.
    fn rescan(&mut self, oracle: &DistanceOracle, slot: usize) -> Result<(), Error> {
        let owner = self.live[slot];
        let mut best: Option<(PointHandle, OrderedDistance)> = None;
        for &other in &self.live {
            if other == owner {
                continue;
            }
            let d = oracle.eval(owner, other)?;
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((other, d));
            }
        }
        self.entries[slot] = best;
        Ok(())
    }

    fn remove_slot(&mut self, slot: usize) {
        self.live.swap_remove(slot);
        self.entries.swap_remove(slot);
        if let Some(moved) = self.live.get(slot) {
            self.slot.insert(moved.id(), slot);
        }
    }
}

impl Default for NeighborHeuristic {
    fn default() -> Self {
        Self::new()
    }
}

impl ClosestPairStructure for NeighborHeuristic {
    fn insert(&mut self, oracle: &DistanceOracle, x: PointHandle) -> Result<(), Error> {
        if self.slot.contains_key(&x.id()) {
            return Err(Error::DuplicateHandle(x));
        }
        // One scan serves double duty: it finds x's nearest neighbor and
        // offers x to every existing point, replacing entries only on
        // strict improvement (ties keep the incumbent).
        let mut best: Option<(PointHandle, OrderedDistance)> = None;
        for slot in 0..self.live.len() {
            let p = self.live[slot];
            let d = oracle.eval(x, p)?;
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((p, d));
            }
            let improves = match self.entries[slot] {
                Some((_, pd)) => d < pd,
                None => true,
            };
            if improves {
                self.entries[slot] = Some((x, d));
            }
        }
        self.slot.insert(x.id(), self.live.len());
        self.live.push(x);
        self.entries.push(best);
        Ok(())
    }

    fn delete(&mut self, oracle: &DistanceOracle, x: PointHandle) -> Result<(), Error> {
        let slot = self.slot.remove(&x.id()).ok_or(Error::UnknownHandle(x))?;
        let mut movers: Vec<PointHandle> = self
            .live
            .iter()
            .zip(&self.entries)
            .filter(|&(&p, entry)| p != x && matches!(entry, Some((n, _)) if *n == x))
            .map(|(&p, _)| p)
            .collect();
        movers.sort_unstable();
        self.remove_slot(slot);
        for mover in movers {
            let mover_slot = self.slot[&mover.id()];
            self.rescan(oracle, mover_slot)?;
        }
        Ok(())
    }

    fn closest_pair(&self, _oracle: &DistanceOracle) -> Result<Option<PairReport>, Error> {
        if self.live.len() < 2 {
            return Ok(None);
        }
        let mut best: Option<PairReport> = None;
        for (&owner, entry) in self.live.iter().zip(&self.entries) {
            let (neighbor, d) = entry.expect("every point has an entry when two or more are live");
            if best.as_ref().is_none_or(|r| d < r.d) {
                best = Some(PairReport::new(owner, neighbor, d));
            }
        }
        Ok(best)
    }

    fn invalidate_pair(
        &mut self,
        oracle: &DistanceOracle,
        a: PointHandle,
        b: PointHandle,
    ) -> Result<(), Error> {
        check_pair(&self.slot, a, b)?;
        // Only the two mutual entries can go stale; everyone else's stored
        // pair does not involve (a, b).
        for (owner, other) in [(a, b), (b, a)] {
            let slot = self.slot[&owner.id()];
            if matches!(self.entries[slot], Some((n, _)) if n == other) {
                self.rescan(oracle, slot)?;
            }
        }
        Ok(())
    }

    fn len(&self) -> usize {
        self.live.len()
    }

    fn contains(&self, x: PointHandle) -> bool {
        self.slot.contains_key(&x.id())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(i: u64) -> PointHandle {
        PointHandle::new(i)
    }

    fn matrix_oracle(matrix: Vec<Vec<f64>>) -> DistanceOracle {
        DistanceOracle::new(move |a, b| matrix[a as usize][b as usize])
    }

    #[test]
    fn bf_explicit_minimum_and_eval_counts() {
        // d(0,1)=5, d(0,2)=3, d(1,2)=4
        let oracle = matrix_oracle(vec![
            vec![0.0, 5.0, 3.0],
            vec![5.0, 0.0, 4.0],
            vec![3.0, 4.0, 0.0],
        ]);
        let mut bf = BruteForce::new();
        for i in 0..3 {
            bf.insert(&oracle, h(i)).unwrap();
        }
        let before = oracle.eval_count();
        let report = bf.closest_pair(&oracle).unwrap().unwrap();
        assert_eq!(oracle.eval_count() - before, 3);
        assert_eq!((report.a, report.b), (h(0), h(2)));
        assert_eq!(report.d, OrderedDistance::finite(3.0));
    }

    #[test]
    fn bf_two_points_single_eval() {
        let oracle = DistanceOracle::new(|_, _| 7.0);
        let mut bf = BruteForce::new();
        bf.insert(&oracle, h(0)).unwrap();
        bf.insert(&oracle, h(1)).unwrap();
        let report = bf.closest_pair(&oracle).unwrap().unwrap();
        assert_eq!(report.d.value(), 7.0);
        assert_eq!(oracle.eval_count(), 1);
    }

    #[test]
    fn bf_fewer_than_two_objects_reports_none() {
        let oracle = DistanceOracle::new(|_, _| 1.0);
        let mut bf = BruteForce::new();
        assert!(bf.closest_pair(&oracle).unwrap().is_none());
        bf.insert(&oracle, h(5)).unwrap();
        assert!(bf.closest_pair(&oracle).unwrap().is_none());
    }

    #[test]
    fn bf_duplicate_and_unknown_handles_rejected() {
        let oracle = DistanceOracle::new(|_, _| 1.0);
        let mut bf = BruteForce::new();
        bf.insert(&oracle, h(1)).unwrap();
        assert_eq!(bf.insert(&oracle, h(1)), Err(Error::DuplicateHandle(h(1))));
        assert_eq!(bf.delete(&oracle, h(2)), Err(Error::UnknownHandle(h(2))));
    }

    #[test]
    fn nh_insert_into_single_point_creates_mutual_pair() {
        let oracle = DistanceOracle::new(|_, _| 2.5);
        let mut nh = NeighborHeuristic::new();
        nh.insert(&oracle, h(0)).unwrap();
        nh.insert(&oracle, h(1)).unwrap();
        let entries = nh.entries();
        assert_eq!(entries.len(), 2);
        for e in entries {
            assert_eq!(e.dist.value(), 2.5);
        }
        let report = nh.closest_pair(&oracle).unwrap().unwrap();
        assert_eq!((report.a, report.b), (h(0), h(1)));
    }

    #[test]
    fn nh_insert_updates_on_strict_improvement_only() {
        // 0 and 1 at distance 4. Then insert 2 closer to 0 (d=1), and
        // insert 3 exactly tied with 1's current neighbor distance.
        let oracle = matrix_oracle(vec![
            vec![0.0, 4.0, 1.0, 9.0],
            vec![4.0, 0.0, 9.0, 4.0],
            vec![1.0, 9.0, 0.0, 9.0],
            vec![9.0, 4.0, 9.0, 0.0],
        ]);
        let mut nh = NeighborHeuristic::new();
        for i in 0..2 {
            nh.insert(&oracle, h(i)).unwrap();
        }
        nh.insert(&oracle, h(2)).unwrap();
        let e0 = nh.entries().into_iter().find(|e| e.owner == h(0)).unwrap();
        assert_eq!(e0.neighbor, h(2), "strictly closer point replaces entry");

        nh.insert(&oracle, h(3)).unwrap();
        let e1 = nh.entries().into_iter().find(|e| e.owner == h(1)).unwrap();
        assert_eq!(e1.neighbor, h(0), "tied distance keeps the incumbent");
    }

    #[test]
    fn nh_delete_of_nobodys_neighbor_rescans_nothing() {
        // 0-1 are close; 2 is far from both, nobody's neighbor.
        let oracle = matrix_oracle(vec![
            vec![0.0, 1.0, 50.0],
            vec![1.0, 0.0, 60.0],
            vec![50.0, 60.0, 0.0],
        ]);
        let mut nh = NeighborHeuristic::new();
        for i in 0..3 {
            nh.insert(&oracle, h(i)).unwrap();
        }
        let before = oracle.eval_count();
        nh.delete(&oracle, h(2)).unwrap();
        assert_eq!(oracle.eval_count(), before, "no entry named the deleted point");
    }

    #[test]
    fn nh_star_hub_delete_costs_quadratic_rescans() {
        // Hub 0 is near-equidistant-closest to everyone; all spokes are far
        // from each other, so every entry names the hub.
        let n: usize = 24;
        let oracle = DistanceOracle::new(move |a, b| {
            if a == 0 {
                1.0 + b as f64 * 1e-6
            } else {
                10.0 + (a * 131 + b) as f64 * 1e-6
            }
        });
        let mut nh = NeighborHeuristic::new();
        for i in 0..n as u64 {
            nh.insert(&oracle, h(i)).unwrap();
        }
        for e in nh.entries() {
            if e.owner != h(0) {
                assert_eq!(e.neighbor, h(0));
            }
        }
        let before = oracle.eval_count();
        nh.delete(&oracle, h(0)).unwrap();
        // n-1 movers each rescan the n-2 other survivors.
        assert_eq!(
            (oracle.eval_count() - before) as usize,
            (n - 1) * (n - 2)
        );
    }

    #[test]
    fn nh_invalidate_rescans_only_mutual_entries() {
        let oracle = matrix_oracle(vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 6.0],
            vec![5.0, 6.0, 0.0],
        ]);
        let mut nh = NeighborHeuristic::new();
        for i in 0..3 {
            nh.insert(&oracle, h(i)).unwrap();
        }
        oracle.set_infinite(h(0), h(1));
        nh.invalidate_pair(&oracle, h(0), h(1)).unwrap();
        let report = nh.closest_pair(&oracle).unwrap().unwrap();
        assert_eq!((report.a, report.b), (h(0), h(2)));
        assert_eq!(report.d.value(), 5.0);
    }
}
