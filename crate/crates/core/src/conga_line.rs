//! The linear-space closest-pair structure: the live set is partitioned
//! into at most `ceil(log2 n)` subsets, each carrying a digraph built by
//! nearest-neighbor path chaining. Some edge in some graph always connects
//! a globally closest pair, so queries scan the (at most `2n`) stored
//! edges.

use std::collections::{BTreeSet, HashSet};

use crate::distance::OrderedDistance;
use crate::error::Error;
use crate::handle::{PairReport, PointHandle};
use crate::oracle::DistanceOracle;
use crate::structure::ClosestPairStructure;

/// One stored candidate edge. `dist` is the oracle's answer at creation
/// time, which stays current because pair distances only change through
/// explicit invalidation (and invalidation removes the edge).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathEdge {
    pub from: PointHandle,
    pub to: PointHandle,
    pub dist: OrderedDistance,
}

/// Builds the candidate path for a new subset by alternating
/// nearest-neighbor extension: from a path end inside the subset the walk
/// continues to its nearest neighbor in the whole universe; from an end
/// outside the subset it continues to the nearest unvisited subset member.
/// It stops when the relevant candidate pool is exhausted.
///
/// The first vertex is the lowest-handle member, every scan runs in
/// ascending handle order, and nearest-neighbor ties keep the first
/// candidate seen, so construction is deterministic.
pub fn build_path(
    oracle: &DistanceOracle,
    subset: &[PointHandle],
    universe: &[PointHandle],
) -> Result<Vec<PathEdge>, Error> {
    let members: BTreeSet<u64> = subset.iter().map(|h| h.id()).collect();
    let live: BTreeSet<u64> = universe.iter().map(|h| h.id()).collect();
    build_path_over(oracle, &members, &live)
}

fn build_path_over(
    oracle: &DistanceOracle,
    members: &BTreeSet<u64>,
    live: &BTreeSet<u64>,
) -> Result<Vec<PathEdge>, Error> {
    let Some(&first) = members.first() else {
        return Err(Error::EmptySubset);
    };
    debug_assert!(members.is_subset(live));
    let mut in_path: HashSet<u64> = HashSet::new();
    in_path.insert(first);
    let mut last = first;
    let mut last_in_members = true;
    let mut edges = Vec::new();
    loop {
        let pool = if last_in_members { live } else { members };
        let mut best: Option<(u64, OrderedDistance)> = None;
        for &c in pool {
            if in_path.contains(&c) {
                continue;
            }
            let d = oracle.eval(PointHandle::new(last), PointHandle::new(c))?;
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((c, d));
            }
        }
        let Some((next, d)) = best else { break };
        edges.push(PathEdge {
            from: PointHandle::new(last),
            to: PointHandle::new(next),
            dist: d,
        });
        in_path.insert(next);
        last = next;
        last_in_members = members.contains(&next);
    }
    Ok(edges)
}

struct Subset {
    members: BTreeSet<u64>,
    graph: Vec<PathEdge>,
    // Minimum edge of `graph`, refreshed at the end of every public
    // operation that touched the graph.
    cached_min: Option<PathEdge>,
    dirty: bool,
}

impl Subset {
    fn new(members: BTreeSet<u64>, graph: Vec<PathEdge>) -> Subset {
        let mut s = Subset {
            members,
            graph,
            cached_min: None,
            dirty: true,
        };
        s.refresh_min();
        s
    }

    fn refresh_min(&mut self) {
        let mut best: Option<PathEdge> = None;
        for &e in &self.graph {
            if best.is_none_or(|b| e.dist < b.dist) {
                best = Some(e);
            }
        }
        self.cached_min = best;
        self.dirty = false;
    }
}

/// Shared machinery for the conga-line family; the merge policy is what
/// distinguishes the basic structure from MultiConga.
pub(crate) struct CongaCore {
    live: BTreeSet<u64>,
    subsets: Vec<Subset>,
}

impl CongaCore {
    pub(crate) fn new() -> CongaCore {
        CongaCore {
            live: BTreeSet::new(),
            subsets: Vec::new(),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.live.len()
    }

    pub(crate) fn contains(&self, x: PointHandle) -> bool {
        self.live.contains(&x.id())
    }

    pub(crate) fn total_edges(&self) -> usize {
        self.subsets.iter().map(|s| s.graph.len()).sum()
    }

    pub(crate) fn subset_count(&self) -> usize {
        self.subsets.len()
    }

    pub(crate) fn subset_sizes(&self) -> Vec<usize> {
        self.subsets.iter().map(|s| s.members.len()).collect()
    }

    /// Rebuild trigger: when the stored edges reach twice the live count,
    /// everything moves back into a single subset with one fresh path.
    pub(crate) fn maybe_rebuild(&mut self, oracle: &DistanceOracle) -> Result<(), Error> {
        if !self.live.is_empty() && self.total_edges() >= 2 * self.live.len() {
            let members = self.live.clone();
            let graph = build_path_over(oracle, &members, &self.live)?;
            self.subsets = vec![Subset::new(members, graph)];
        }
        Ok(())
    }

    pub(crate) fn insert(&mut self, oracle: &DistanceOracle, x: PointHandle) -> Result<(), Error> {
        if self.live.contains(&x.id()) {
            return Err(Error::DuplicateHandle(x));
        }
        self.live.insert(x.id());
        let members = BTreeSet::from([x.id()]);
        let graph = build_path_over(oracle, &members, &self.live)?;
        self.subsets.push(Subset::new(members, graph));
        Ok(())
    }

    /// Initial population: all objects form one subset with a single path.
    pub(crate) fn bulk_init(
        &mut self,
        oracle: &DistanceOracle,
        points: &[PointHandle],
    ) -> Result<(), Error> {
        assert!(self.live.is_empty(), "bulk_init needs an empty structure");
        if points.is_empty() {
            return Ok(());
        }
        let mut members = BTreeSet::new();
        for &p in points {
            if !members.insert(p.id()) {
                return Err(Error::DuplicateHandle(p));
            }
        }
        self.live = members.clone();
        let graph = build_path_over(oracle, &members, &self.live)?;
        self.subsets.push(Subset::new(members, graph));
        Ok(())
    }

    /// Removes `x` and all its incident edges, then gathers the movers
    /// (every `y` with a stored edge `y -> x`) into one new subset with a
    /// fresh path.
    pub(crate) fn delete(&mut self, oracle: &DistanceOracle, x: PointHandle) -> Result<(), Error> {
        if !self.live.contains(&x.id()) {
            return Err(Error::UnknownHandle(x));
        }
        let id = x.id();
        let mut movers: BTreeSet<u64> = BTreeSet::new();
        for subset in &mut self.subsets {
            let before = subset.graph.len();
            subset.graph.retain(|e| {
                if e.to.id() == id {
                    movers.insert(e.from.id());
                }
                e.from.id() != id && e.to.id() != id
            });
            if subset.graph.len() != before {
                subset.dirty = true;
            }
            subset.members.remove(&id);
        }
        movers.remove(&id);
        self.live.remove(&id);
        self.detach(&movers);
        if !movers.is_empty() {
            let graph = build_path_over(oracle, &movers, &self.live)?;
            self.subsets.push(Subset::new(movers, graph));
        }
        self.prune_empty();
        Ok(())
    }

    /// Re-homes `a` and `b` into one fresh subset after their distance was
    /// retired on the oracle, dropping any stored edge between them.
    pub(crate) fn invalidate(
        &mut self,
        oracle: &DistanceOracle,
        a: PointHandle,
        b: PointHandle,
    ) -> Result<(), Error> {
        if a == b {
            return Err(Error::SelfPair(a));
        }
        for h in [a, b] {
            if !self.live.contains(&h.id()) {
                return Err(Error::UnknownHandle(h));
            }
        }
        let pair = BTreeSet::from([a.id(), b.id()]);
        for subset in &mut self.subsets {
            let before = subset.graph.len();
            subset
                .graph
                .retain(|e| !(pair.contains(&e.from.id()) && pair.contains(&e.to.id())));
            if subset.graph.len() != before {
                subset.dirty = true;
            }
        }
        self.detach(&pair);
        let graph = build_path_over(oracle, &pair, &self.live)?;
        self.subsets.push(Subset::new(pair, graph));
        self.prune_empty();
        Ok(())
    }

    fn detach(&mut self, ids: &BTreeSet<u64>) {
        for subset in &mut self.subsets {
            for id in ids {
                subset.members.remove(id);
            }
        }
    }

    // A subset whose members all moved away contributes nothing: the
    // closest-pair witness of any live point sits in the graph of the
    // subset that currently holds it.
    fn prune_empty(&mut self) {
        self.subsets.retain(|s| !s.members.is_empty());
    }

    /// Merges the pair of subsets minimizing the size ratio `|Sj|/|Si|`
    /// (|Si| <= |Sj|) until at most `limit` remain. The merged subset
    /// takes the earlier position and gets a rebuilt path.
    pub(crate) fn merge_until(&mut self, oracle: &DistanceOracle, limit: usize) -> Result<(), Error> {
        while self.subsets.len() > limit {
            let mut best: Option<(usize, usize)> = None;
            // Compare ratios hi/lo by cross-multiplication.
            let mut best_ratio: Option<(u64, u64)> = None;
            for i in 0..self.subsets.len() {
                for j in i + 1..self.subsets.len() {
                    let si = self.subsets[i].members.len() as u64;
                    let sj = self.subsets[j].members.len() as u64;
                    let (lo, hi) = if si <= sj { (si, sj) } else { (sj, si) };
                    let better = match best_ratio {
                        None => true,
                        Some((blo, bhi)) => hi * blo < bhi * lo,
                    };
                    if better {
                        best_ratio = Some((lo, hi));
                        best = Some((i, j));
                    }
                }
            }
            let Some((i, j)) = best else { break };
            let second = self.subsets.remove(j);
            let mut merged = self.subsets.remove(i).members;
            merged.extend(second.members);
            let graph = build_path_over(oracle, &merged, &self.live)?;
            self.subsets.insert(i, Subset::new(merged, graph));
        }
        Ok(())
    }

    pub(crate) fn flush_caches(&mut self) {
        for subset in &mut self.subsets {
            if subset.dirty {
                subset.refresh_min();
            }
        }
    }

    /// Minimum over all stored edges, scanning cached per-subset minima in
    /// subset creation order (first wins on ties).
    pub(crate) fn min_edge(&self) -> Option<PairReport> {
        debug_assert!(self.subsets.iter().all(|s| !s.dirty));
        let mut best: Option<PathEdge> = None;
        for subset in &self.subsets {
            if let Some(e) = subset.cached_min {
                if best.is_none_or(|b| e.dist < b.dist) {
                    best = Some(e);
                }
            }
        }
        best.map(|e| PairReport::new(e.from, e.to, e.dist))
    }

    /// Line-oriented dump of the partition and graphs, for golden tests.
    pub(crate) fn debug_dump(&self) -> String {
        let mut out = String::new();
        for (i, subset) in self.subsets.iter().enumerate() {
            let members: Vec<String> = subset.members.iter().map(|m| m.to_string()).collect();
            let edges: Vec<String> = subset
                .graph
                .iter()
                .map(|e| format!("{}->{}:{}", e.from, e.to, e.dist))
                .collect();
            out.push_str(&format!(
                "subset {i}: members=[{}] edges=[{}]\n",
                members.join(","),
                edges.join(",")
            ));
        }
        out
    }
}

/// `ceil(log2 n)` with the small cases pinned to 1.
pub(crate) fn log2_ceil(n: usize) -> usize {
    if n <= 2 {
        1
    } else {
        ((n - 1).ilog2() + 1) as usize
    }
}

/// How many subsets the basic conga line keeps after each operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsetLimit {
    /// `ceil(log2 n)` of the current live count, re-evaluated per
    /// operation (floored at 1).
    Log2Ceil,
    /// A fixed cap, for experimentation with the partition parameter.
    Fixed(usize),
}

impl SubsetLimit {
    fn limit(self, live: usize) -> usize {
        match self {
            SubsetLimit::Log2Ceil => log2_ceil(live.max(1)),
            SubsetLimit::Fixed(k) => k.max(1),
        }
    }
}

/// The basic conga line structure.
pub struct CongaLine {
    core: CongaCore,
    policy: SubsetLimit,
}

impl CongaLine {
    pub fn new() -> CongaLine {
        Self::with_subset_limit(SubsetLimit::Log2Ceil)
    }

    pub fn with_subset_limit(policy: SubsetLimit) -> CongaLine {
        CongaLine {
            core: CongaCore::new(),
            policy,
        }
    }

    pub fn total_edges(&self) -> usize {
        self.core.total_edges()
    }

    pub fn subset_count(&self) -> usize {
        self.core.subset_count()
    }

    pub fn subset_sizes(&self) -> Vec<usize> {
        self.core.subset_sizes()
    }

    pub fn debug_dump(&self) -> String {
        self.core.debug_dump()
    }

    fn settle(&mut self, oracle: &DistanceOracle) -> Result<(), Error> {
        self.core
            .merge_until(oracle, self.policy.limit(self.core.len()))?;
        self.core.maybe_rebuild(oracle)?;
        self.core.flush_caches();
        Ok(())
    }
}

impl Default for CongaLine {
    fn default() -> Self {
        Self::new()
    }
}

impl ClosestPairStructure for CongaLine {
    fn insert(&mut self, oracle: &DistanceOracle, x: PointHandle) -> Result<(), Error> {
        self.core.maybe_rebuild(oracle)?;
        self.core.insert(oracle, x)?;
        self.settle(oracle)
    }

    fn delete(&mut self, oracle: &DistanceOracle, x: PointHandle) -> Result<(), Error> {
        self.core.maybe_rebuild(oracle)?;
        self.core.delete(oracle, x)?;
        self.settle(oracle)
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
        self.settle(oracle)
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
