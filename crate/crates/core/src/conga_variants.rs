//! The two simplified conga-line structures: MultiConga never merges
//! subsets, and FastPair collapses the partition down to one stored
//! neighbor per point.

use std::collections::HashMap;

use crate::conga_line::CongaCore;
use crate::distance::OrderedDistance;
use crate::error::Error;
use crate::handle::{PairReport, PointHandle};
use crate::oracle::DistanceOracle;
use crate::structure::ClosestPairStructure;

/// Conga line without the merge step: inserts create singleton subsets
/// whose graph is a single nearest-neighbor edge, deletes move all
/// in-neighbors into one new subset, and the subset count is left to grow.
/// The `2n` edge rebuild guard is kept unchanged; emptied subsets are
/// pruned eagerly so the subset list stays proportional to the live set.
pub struct MultiConga {
    core: CongaCore,
}

impl MultiConga {
    pub fn new() -> MultiConga {
        MultiConga {
            core: CongaCore::new(),
        }
    }

    pub fn total_edges(&self) -> usize {
        self.core.total_edges()
    }

    pub fn subset_count(&self) -> usize {
        self.core.subset_count()
    }

    pub fn debug_dump(&self) -> String {
        self.core.debug_dump()
    }
}

impl Default for MultiConga {
    fn default() -> Self {
        Self::new()
    }
}

impl ClosestPairStructure for MultiConga {
    fn insert(&mut self, oracle: &DistanceOracle, x: PointHandle) -> Result<(), Error> {
        self.core.maybe_rebuild(oracle)?;
        self.core.insert(oracle, x)?;
        self.core.maybe_rebuild(oracle)?;
        self.core.flush_caches();
        Ok(())
    }

    fn delete(&mut self, oracle: &DistanceOracle, x: PointHandle) -> Result<(), Error> {
        self.core.maybe_rebuild(oracle)?;
        self.core.delete(oracle, x)?;
        self.core.maybe_rebuild(oracle)?;
        self.core.flush_caches();
        Ok(())
    }

    fn closest_pair(&self, _oracle: &DistanceOracle) -> Result<Option<PairReport>, Error> {
        if self.core.len() < 2 {
            return Ok(None);
        }
        Ok(self.core.min_edge())
    }

    fn invalidate_pair(
        &mut self,
        oracle: &DistanceOracle,
        a: PointHandle,
        b: PointHandle,
    ) -> Result<(), Error> {
        self.core.maybe_rebuild(oracle)?;
        self.core.invalidate(oracle, a, b)?;
        self.core.maybe_rebuild(oracle)?;
        self.core.flush_caches();
        Ok(())
    }

    fn len(&self) -> usize {
        self.core.len()
    }

    fn contains(&self, x: PointHandle) -> bool {
        self.core.contains(x)
    }

    fn bulk_init(&mut self, oracle: &DistanceOracle, points: &[PointHandle]) -> Result<(), Error> {
        self.core.bulk_init(oracle, points)
    }
}

/// One stored witness edge per point. Unlike the neighbor heuristic's
/// entries, `neighbor` need not be a true nearest neighbor; the structure
/// only guarantees that scanning all entries yields the global closest
/// pair. The path tail (or a lone point) holds a sentinel entry at
/// infinity so scans need no special case.
#[derive(Debug, Clone, Copy)]
pub struct FastPairEntry {
    pub owner: PointHandle,
    pub neighbor: Option<PointHandle>,
    pub dist: OrderedDistance,
}

/// The FastPair structure: initialized by building a single conga line
/// (which bounds in-degrees better than all-nearest-neighbors), inserts
/// compute only the new point's own entry, and when a deletion strands `k`
/// points each one rebuilds its entry independently as its own singleton.
/// At most one entry per live point is ever stored, so no rebuild logic
/// exists. The partition is implicit and never materialized.
pub struct FastPair {
    live: Vec<PointHandle>,
    slot: HashMap<u64, usize>,
    // Parallel to `live`: (witness neighbor, stored distance).
    entries: Vec<(Option<PointHandle>, OrderedDistance)>,
}

const SENTINEL: (Option<PointHandle>, OrderedDistance) = (None, OrderedDistance::INFINITY);

impl FastPair {
    pub fn new() -> FastPair {
        FastPair {
            live: Vec::new(),
            slot: HashMap::new(),
            entries: Vec::new(),
        }
    }

    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> Vec<FastPairEntry> {
        self.live
            .iter()
            .zip(&self.entries)
            .map(|(&owner, &(neighbor, dist))| FastPairEntry {
                owner,
                neighbor,
                dist,
            })
            .collect()
    }

    /// Full scan rebuilding the entry of the point at `slot` (the point as
    /// its own singleton subset: one edge to its nearest live neighbor,
    /// first-encountered in slot order on ties).
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
        self.entries[slot] = match best {
            Some((n, d)) => (Some(n), d),
            None => SENTINEL,
        };
        Ok(())
    }

    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        for (&owner, &(neighbor, dist)) in self.live.iter().zip(&self.entries) {
            match neighbor {
                Some(n) => out.push_str(&format!("entry {owner}->{n}:{dist}\n")),
                None => out.push_str(&format!("entry {owner}->-:{dist}\n")),
            }
        }
        out
    }
}

impl Default for FastPair {
    fn default() -> Self {
        Self::new()
    }
}

impl ClosestPairStructure for FastPair {
    fn insert(&mut self, oracle: &DistanceOracle, x: PointHandle) -> Result<(), Error> {
        if self.slot.contains_key(&x.id()) {
            return Err(Error::DuplicateHandle(x));
        }
        // Only the new point's entry is computed; everyone else's stored
        // neighbor stays put even when x is nearer. The global pair is
        // still witnessed from x's side.
        let mut best: Option<(PointHandle, OrderedDistance)> = None;
        for &other in &self.live {
            let d = oracle.eval(x, other)?;
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((other, d));
            }
        }
        self.slot.insert(x.id(), self.live.len());
        self.live.push(x);
        self.entries.push(match best {
            Some((n, d)) => (Some(n), d),
            None => SENTINEL,
        });
        Ok(())
    }

    fn delete(&mut self, oracle: &DistanceOracle, x: PointHandle) -> Result<(), Error> {
        let slot = self.slot.remove(&x.id()).ok_or(Error::UnknownHandle(x))?;
        let mut movers: Vec<PointHandle> = self
            .live
            .iter()
            .zip(&self.entries)
            .filter(|&(&p, &(n, _))| p != x && n == Some(x))
            .map(|(&p, _)| p)
            .collect();
        movers.sort_unstable();
        self.live.swap_remove(slot);
        self.entries.swap_remove(slot);
        if let Some(moved) = self.live.get(slot) {
            self.slot.insert(moved.id(), slot);
        }
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
        for (&owner, &(neighbor, d)) in self.live.iter().zip(&self.entries) {
            let Some(n) = neighbor else { continue };
            if best.as_ref().is_none_or(|r| d < r.d) {
                best = Some(PairReport::new(owner, n, d));
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
        if a == b {
            return Err(Error::SelfPair(a));
        }
        for h in [a, b] {
            if !self.slot.contains_key(&h.id()) {
                return Err(Error::UnknownHandle(h));
            }
        }
        // Both endpoints re-home as singletons, exactly as if a deletion
        // had stranded them.
        for h in [a, b] {
            let slot = self.slot[&h.id()];
            self.rescan(oracle, slot)?;
        }
        Ok(())
    }

    fn len(&self) -> usize {
        self.live.len()
    }

    fn contains(&self, x: PointHandle) -> bool {
        self.slot.contains_key(&x.id())
    }

    /// Batch construction: one nearest-neighbor chain over all points, each
    /// point's entry being its outgoing chain edge.
    fn bulk_init(&mut self, oracle: &DistanceOracle, points: &[PointHandle]) -> Result<(), Error> {
        assert!(self.is_empty(), "bulk_init needs an empty structure");
        if points.is_empty() {
            return Ok(());
        }
        let mut sorted: Vec<PointHandle> = points.to_vec();
        sorted.sort_unstable();
        for window in sorted.windows(2) {
            if window[0] == window[1] {
                return Err(Error::DuplicateHandle(window[0]));
            }
        }
        for &p in points {
            self.slot.insert(p.id(), self.live.len());
            self.live.push(p);
            self.entries.push(SENTINEL);
        }
        // Chain from the lowest handle; each step scans the unvisited
        // remainder in ascending handle order.
        let mut remaining = sorted;
        let mut last = remaining.remove(0);
        while !remaining.is_empty() {
            let mut best = 0;
            let mut best_d = oracle.eval(last, remaining[0])?;
            for (i, &candidate) in remaining.iter().enumerate().skip(1) {
                let d = oracle.eval(last, candidate)?;
                if d < best_d {
                    best = i;
                    best_d = d;
                }
            }
            let next = remaining.remove(best);
            self.entries[self.slot[&last.id()]] = (Some(next), best_d);
            last = next;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(i: u64) -> PointHandle {
        PointHandle::new(i)
    }

    fn line_oracle() -> DistanceOracle {
        DistanceOracle::new(|a, b| (a as f64 - b as f64).abs())
    }

    #[test]
    fn mc_insert_into_singleton_builds_one_edge() {
        let oracle = line_oracle();
        let mut mc = MultiConga::new();
        mc.insert(&oracle, h(5)).unwrap();
        mc.insert(&oracle, h(9)).unwrap();
        assert_eq!(mc.total_edges(), 1);
        let report = mc.closest_pair(&oracle).unwrap().unwrap();
        assert_eq!((report.a, report.b), (h(5), h(9)));
    }

    #[test]
    fn mc_delete_gathers_movers_into_one_subset() {
        let oracle = line_oracle();
        let mut mc = MultiConga::new();
        mc.bulk_init(&oracle, &[h(0), h(1), h(2), h(3)]).unwrap();
        let before = mc.subset_count();
        assert_eq!(before, 1);
        mc.delete(&oracle, h(1)).unwrap();
        // Deleting from a fresh path strands at most one in-neighbor.
        assert!(mc.subset_count() <= 2);
        let report = mc.closest_pair(&oracle).unwrap().unwrap();
        assert_eq!(report.d, OrderedDistance::finite(1.0));
    }

    #[test]
    fn mc_subset_count_can_exceed_log_limit() {
        let oracle = line_oracle();
        let mut mc = MultiConga::new();
        for i in 0..20 {
            mc.insert(&oracle, h(i)).unwrap();
        }
        // Never merged: one subset per insert (rebuild guard not hit since
        // each insert adds a single edge: 19 edges < 2 * 20).
        assert_eq!(mc.subset_count(), 20);
        assert!(mc.total_edges() <= 2 * mc.len());
    }

    #[test]
    fn fp_chain_init_matches_hand_trace() {
        // Points {0, 10, 11} from 0: entries 0->10 (10), 10->11 (1),
        // 11 -> sentinel at infinity.
        let oracle = line_oracle();
        let mut fp = FastPair::new();
        fp.bulk_init(&oracle, &[h(0), h(10), h(11)]).unwrap();
        assert_eq!(
            fp.debug_dump(),
            "entry 0->10:10\nentry 10->11:1\nentry 11->-:inf\n"
        );
        let report = fp.closest_pair(&oracle).unwrap().unwrap();
        assert_eq!((report.a, report.b), (h(10), h(11)));
    }

    #[test]
    fn fp_single_point_holds_sentinel() {
        let oracle = line_oracle();
        let mut fp = FastPair::new();
        fp.bulk_init(&oracle, &[h(7)]).unwrap();
        assert_eq!(fp.entry_count(), 1);
        assert!(fp.closest_pair(&oracle).unwrap().is_none());
    }

    #[test]
    fn fp_insert_leaves_other_entries_untouched() {
        let oracle = line_oracle();
        let mut fp = FastPair::new();
        fp.bulk_init(&oracle, &[h(0), h(100)]).unwrap();
        let before = fp.debug_dump();
        assert_eq!(before, "entry 0->100:100\nentry 100->-:inf\n");
        // 99 is far closer to 100 than 100's stored neighbor; the stored
        // entry stays, and the new point witnesses the pair itself.
        fp.insert(&oracle, h(99)).unwrap();
        assert!(fp.debug_dump().contains("entry 100->-:inf\n"));
        let report = fp.closest_pair(&oracle).unwrap().unwrap();
        assert_eq!((report.a, report.b), (h(99), h(100)));
        assert_eq!(report.d, OrderedDistance::finite(1.0));
    }

    #[test]
    fn fp_delete_rescans_exactly_the_pointing_entries() {
        let oracle = line_oracle();
        let mut fp = FastPair::new();
        fp.bulk_init(&oracle, &[h(0), h(10), h(11)]).unwrap();
        // Nobody points at 0, so deleting it rescans nothing.
        let before = oracle.eval_count();
        fp.delete(&oracle, h(0)).unwrap();
        assert_eq!(oracle.eval_count(), before);
        // Exactly one entry (10 -> 11) names 11: that mover rescans, but
        // with no candidates left its entry falls back to the sentinel.
        fp.delete(&oracle, h(11)).unwrap();
        assert_eq!(oracle.eval_count(), before);
        assert_eq!(fp.entry_count(), 1);
        assert!(fp.debug_dump().contains("entry 10->-:inf"));
    }

    #[test]
    fn fp_entry_count_always_matches_live_count() {
        let oracle = line_oracle();
        let mut fp = FastPair::new();
        for i in 0..12 {
            fp.insert(&oracle, h(i)).unwrap();
            assert_eq!(fp.entry_count(), fp.len());
        }
        for i in (0..12).step_by(2) {
            fp.delete(&oracle, h(i)).unwrap();
            assert_eq!(fp.entry_count(), fp.len());
        }
    }
}
