//! Quadratic-space structure: the distance matrix is recursively halved
//! into power-of-two index blocks, and every block pair stores the minimum
//! distance between its two object sets together with the minimizing slot
//! pair. The global answer sits in the single top cell; updates touch one
//! row of blocks per level, which is `O(n)` cells per insert or delete and
//! `O(log n)` for a single-distance change.

use std::collections::HashMap;

use crate::conga_line::log2_ceil;
use crate::distance::OrderedDistance;
use crate::error::Error;
use crate::handle::{PairReport, PointHandle};
use crate::oracle::DistanceOracle;
use crate::structure::ClosestPairStructure;

/// Default point capacity. Quadratic storage makes this a real budget:
/// the cell count is about `2n²/3`.
pub const DEFAULT_CAPACITY: usize = 4096;

#[derive(Debug, Clone, Copy)]
struct Cell {
    dist: OrderedDistance,
    // Minimizing (slot, slot) pair; None when the cell covers no pair of
    // distinct objects (diagonal singletons). Such cells are always at
    // infinity and never win a min against a real pair.
    pair: Option<(u32, u32)>,
}

const EMPTY_CELL: Cell = Cell {
    dist: OrderedDistance::INFINITY,
    pair: None,
};

// Triangular block-pair storage for one level: rows[i][k - i] is the cell
// for blocks (i, k), i <= k. Rows grow and never shrink; the logical size
// is derived from the live count.
struct Level {
    rows: Vec<Vec<Cell>>,
}

impl Level {
    fn new() -> Level {
        Level { rows: Vec::new() }
    }

    fn ensure(&mut self, m: usize) {
        let have = self.rows.len().min(m);
        for (i, row) in self.rows.iter_mut().enumerate().take(have) {
            while row.len() < m - i {
                row.push(EMPTY_CELL);
            }
        }
        while self.rows.len() < m {
            let i = self.rows.len();
            self.rows.push(vec![EMPTY_CELL; m - i]);
        }
    }

    fn get(&self, i: usize, k: usize) -> Cell {
        debug_assert!(i <= k);
        self.rows[i][k - i]
    }

    fn set(&mut self, i: usize, k: usize, cell: Cell) {
        debug_assert!(i <= k);
        self.rows[i][k - i] = cell;
    }
}

/// The number of index blocks at level `j` for `n` objects.
fn blocks_at(n: usize, j: usize) -> usize {
    (n + (1usize << j) - 1) >> j
}

/// Levels 0 (the distance matrix itself) through `ceil(log2 n)` (the root).
fn level_count(n: usize) -> usize {
    if n <= 1 {
        1
    } else {
        log2_ceil(n) + 1
    }
}

pub struct Quadtree {
    capacity: usize,
    handle_of: Vec<PointHandle>,
    slot_of: HashMap<u64, usize>,
    levels: Vec<Level>,
    base_writes: u64,
    level_writes: u64,
}

impl Quadtree {
    pub fn new() -> Quadtree {
        Self::with_capacity(DEFAULT_CAPACITY)
    }

    pub fn with_capacity(capacity: usize) -> Quadtree {
        Quadtree {
            capacity,
            handle_of: Vec::new(),
            slot_of: HashMap::new(),
            levels: vec![Level::new()],
            base_writes: 0,
            level_writes: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Base-matrix cells written by the last mutating operation.
    pub fn last_base_writes(&self) -> u64 {
        self.base_writes
    }

    /// Block cells (level >= 1) recomputed by the last mutating operation.
    pub fn last_level_writes(&self) -> u64 {
        self.level_writes
    }

    /// Logical number of stored cells across all levels; bounded by
    /// `2n²/3 + O(n)`.
    pub fn cell_count(&self) -> usize {
        let n = self.handle_of.len();
        (0..level_count(n))
            .map(|j| {
                let m = blocks_at(n, j);
                m * (m + 1) / 2
            })
            .sum()
    }

    fn n(&self) -> usize {
        self.handle_of.len()
    }

    fn ensure_levels(&mut self) {
        let n = self.n();
        let want = level_count(n);
        while self.levels.len() < want {
            self.levels.push(Level::new());
        }
        for j in 0..want {
            let m = blocks_at(n, j);
            self.levels[j].ensure(m);
        }
    }

    /// Recomputes cell `(i, k)` of level `j >= 1` from its at most four
    /// children, skipping out-of-range ones. Ties keep the first child in
    /// enumeration order, so recomputation is deterministic.
    fn recompute_cell(&mut self, j: usize, i: usize, k: usize) {
        let child_blocks = blocks_at(self.n(), j - 1);
        let mut best = EMPTY_CELL;
        for (ci, ck) in [
            (2 * i, 2 * k),
            (2 * i, 2 * k + 1),
            (2 * i + 1, 2 * k),
            (2 * i + 1, 2 * k + 1),
        ] {
            let (a, b) = if ci <= ck { (ci, ck) } else { (ck, ci) };
            if b >= child_blocks {
                continue;
            }
            let child = self.levels[j - 1].get(a, b);
            if child.pair.is_some() && (best.pair.is_none() || child.dist < best.dist) {
                best = child;
            }
        }
        self.levels[j].set(i, k, best);
        self.level_writes += 1;
    }

    /// Recomputes, bottom-up, every block cell whose row or column is
    /// `block_of(slot)` at its level.
    fn refresh_slot(&mut self, slot: usize) {
        let n = self.n();
        for j in 1..level_count(n) {
            let m = blocks_at(n, j);
            let b = slot >> j;
            if b >= m {
                continue;
            }
            for t in 0..m {
                let (i, k) = if b <= t { (b, t) } else { (t, b) };
                self.recompute_cell(j, i, k);
            }
        }
    }

    fn refresh_two_slots(&mut self, s1: usize, s2: usize) {
        let n = self.n();
        for j in 1..level_count(n) {
            let m = blocks_at(n, j);
            let mut blocks = [Some(s1 >> j), Some(s2 >> j)];
            if blocks[0] == blocks[1] {
                blocks[1] = None;
            }
            for b in blocks.into_iter().flatten() {
                if b >= m {
                    continue;
                }
                for t in 0..m {
                    let (i, k) = if b <= t { (b, t) } else { (t, b) };
                    self.recompute_cell(j, i, k);
                }
            }
        }
    }

    /// Rewrites one base distance from the oracle and repairs the
    /// `O(log n)` ancestor cells of that matrix entry.
    pub fn update_distance(
        &mut self,
        oracle: &DistanceOracle,
        a: PointHandle,
        b: PointHandle,
    ) -> Result<(), Error> {
        if a == b {
            return Err(Error::SelfPair(a));
        }
        let &sa = self.slot_of.get(&a.id()).ok_or(Error::UnknownHandle(a))?;
        let &sb = self.slot_of.get(&b.id()).ok_or(Error::UnknownHandle(b))?;
        self.base_writes = 0;
        self.level_writes = 0;
        let d = oracle.eval(a, b)?;
        let (lo, hi) = if sa <= sb { (sa, sb) } else { (sb, sa) };
        self.levels[0].set(
            lo,
            hi,
            Cell {
                dist: d,
                pair: Some((lo as u32, hi as u32)),
            },
        );
        self.base_writes = 1;
        let n = self.n();
        for j in 1..level_count(n) {
            let (i, k) = (lo >> j, hi >> j);
            self.recompute_cell(j, i, k);
        }
        Ok(())
    }

    /// Exhaustive structural check: base cells agree with the oracle and
    /// every block cell equals the minimum of its existing children.
    pub fn audit(&self, oracle: &DistanceOracle) -> Result<(), String> {
        let n = self.n();
        for i in 0..n {
            for k in i..n {
                let cell = self.levels[0].get(i, k);
                if i == k {
                    if cell.pair.is_some() {
                        return Err(format!("diagonal base cell ({i},{k}) holds a pair"));
                    }
                    continue;
                }
                let expected = oracle
                    .raw(self.handle_of[i], self.handle_of[k])
                    .map_err(|e| e.to_string())?;
                if cell.dist != expected {
                    return Err(format!(
                        "base cell ({i},{k}) = {} but oracle says {expected}",
                        cell.dist
                    ));
                }
                if cell.pair != Some((i as u32, k as u32)) {
                    return Err(format!("base cell ({i},{k}) names the wrong pair"));
                }
            }
        }
        for j in 1..level_count(n) {
            let m = blocks_at(n, j);
            let child_blocks = blocks_at(n, j - 1);
            for i in 0..m {
                for k in i..m {
                    let mut best = EMPTY_CELL;
                    for (ci, ck) in [
                        (2 * i, 2 * k),
                        (2 * i, 2 * k + 1),
                        (2 * i + 1, 2 * k),
                        (2 * i + 1, 2 * k + 1),
                    ] {
                        let (a, b) = if ci <= ck { (ci, ck) } else { (ck, ci) };
                        if b >= child_blocks {
                            continue;
                        }
                        let child = self.levels[j - 1].get(a, b);
                        if child.pair.is_some() && (best.pair.is_none() || child.dist < best.dist)
                        {
                            best = child;
                        }
                    }
                    let cell = self.levels[j].get(i, k);
                    if cell.dist != best.dist {
                        return Err(format!(
                            "cell ({i},{j},{k}) = {} but children give {}",
                            cell.dist, best.dist
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

impl Default for Quadtree {
    fn default() -> Self {
        Self::new()
    }
}

impl ClosestPairStructure for Quadtree {
    fn insert(&mut self, oracle: &DistanceOracle, x: PointHandle) -> Result<(), Error> {
        if self.slot_of.contains_key(&x.id()) {
            return Err(Error::DuplicateHandle(x));
        }
        if self.n() + 1 > self.capacity {
            return Err(Error::CapacityExceeded {
                capacity: self.capacity,
                requested: self.n() + 1,
            });
        }
        // Evaluate the whole new row first so an unorderable distance
        // rejects the insert without mutating anything.
        let mut row = Vec::with_capacity(self.n());
        for &existing in &self.handle_of {
            row.push(oracle.eval(existing, x)?);
        }
        self.base_writes = 0;
        self.level_writes = 0;
        let idx = self.n();
        self.slot_of.insert(x.id(), idx);
        self.handle_of.push(x);
        self.ensure_levels();
        for (s, d) in row.into_iter().enumerate() {
            self.levels[0].set(
                s,
                idx,
                Cell {
                    dist: d,
                    pair: Some((s as u32, idx as u32)),
                },
            );
            self.base_writes += 1;
        }
        self.refresh_slot(idx);
        Ok(())
    }

    fn delete(&mut self, _oracle: &DistanceOracle, x: PointHandle) -> Result<(), Error> {
        let i = *self.slot_of.get(&x.id()).ok_or(Error::UnknownHandle(x))?;
        self.base_writes = 0;
        self.level_writes = 0;
        let last = self.n() - 1;
        if i != last {
            // The object numbered last takes slot i so the numbering stays
            // consecutive. Its distances are already in the base matrix,
            // so the rewritten row costs no oracle evaluations.
            for s in 0..last {
                if s == i {
                    continue;
                }
                let (ro, co) = if s <= last { (s, last) } else { (last, s) };
                let cell = self.levels[0].get(ro, co);
                let (rn, cn) = if s <= i { (s, i) } else { (i, s) };
                let moved = Cell {
                    dist: cell.dist,
                    pair: Some((rn as u32, cn as u32)),
                };
                self.levels[0].set(rn, cn, moved);
                self.base_writes += 1;
            }
            let moved_handle = self.handle_of[last];
            self.handle_of[i] = moved_handle;
            self.slot_of.insert(moved_handle.id(), i);
        }
        self.handle_of.pop();
        self.slot_of.remove(&x.id());
        if self.n() >= 2 {
            self.refresh_two_slots(i, last);
        }
        Ok(())
    }

    fn closest_pair(&self, _oracle: &DistanceOracle) -> Result<Option<PairReport>, Error> {
        let n = self.n();
        if n < 2 {
            return Ok(None);
        }
        let root = self.levels[level_count(n) - 1].get(0, 0);
        let (i, k) = root.pair.expect("root covers at least one distinct pair");
        Ok(Some(PairReport::new(
            self.handle_of[i as usize],
            self.handle_of[k as usize],
            root.dist,
        )))
    }

    fn invalidate_pair(
        &mut self,
        oracle: &DistanceOracle,
        a: PointHandle,
        b: PointHandle,
    ) -> Result<(), Error> {
        self.update_distance(oracle, a, b)
    }

    fn len(&self) -> usize {
        self.n()
    }

    fn contains(&self, x: PointHandle) -> bool {
        self.slot_of.contains_key(&x.id())
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
    fn second_insert_sets_root_to_the_single_distance() {
        let oracle = DistanceOracle::new(|_, _| 3.5);
        let mut qt = Quadtree::new();
        qt.insert(&oracle, h(0)).unwrap();
        assert!(qt.closest_pair(&oracle).unwrap().is_none());
        qt.insert(&oracle, h(1)).unwrap();
        let report = qt.closest_pair(&oracle).unwrap().unwrap();
        assert_eq!(report.d.value(), 3.5);
        qt.audit(&oracle).unwrap();
    }

    #[test]
    fn fourth_insert_touches_three_base_cells_and_few_blocks() {
        let oracle = DistanceOracle::new(|a, b| (a * 10 + b) as f64);
        let mut qt = Quadtree::new();
        for i in 0..3 {
            qt.insert(&oracle, h(i)).unwrap();
        }
        let evals = oracle.eval_count();
        qt.insert(&oracle, h(3)).unwrap();
        assert_eq!(oracle.eval_count() - evals, 3);
        assert_eq!(qt.last_base_writes(), 3);
        assert!(qt.last_level_writes() <= 2 * 4);
        qt.audit(&oracle).unwrap();
    }

    #[test]
    fn explicit_matrix_min_with_argmin_pair() {
        // n=4, minimum at d(1,3)=1.
        let oracle = matrix_oracle(vec![
            vec![0.0, 9.0, 8.0, 7.0],
            vec![9.0, 0.0, 6.0, 1.0],
            vec![8.0, 6.0, 0.0, 5.0],
            vec![7.0, 1.0, 5.0, 0.0],
        ]);
        let mut qt = Quadtree::new();
        for i in 0..4 {
            qt.insert(&oracle, h(i)).unwrap();
        }
        let report = qt.closest_pair(&oracle).unwrap().unwrap();
        assert_eq!((report.a, report.b), (h(1), h(3)));
        assert_eq!(report.d.value(), 1.0);
    }

    #[test]
    fn delete_renumbers_the_last_object_into_the_hole() {
        let oracle = matrix_oracle(vec![
            vec![0.0, 4.0, 2.0],
            vec![4.0, 0.0, 3.0],
            vec![2.0, 3.0, 0.0],
        ]);
        let mut qt = Quadtree::new();
        for i in 0..3 {
            qt.insert(&oracle, h(i)).unwrap();
        }
        let evals = oracle.eval_count();
        // Deleting slot 0 moves object 2 into slot 0 without re-evaluating.
        qt.delete(&oracle, h(0)).unwrap();
        assert_eq!(oracle.eval_count(), evals);
        let report = qt.closest_pair(&oracle).unwrap().unwrap();
        assert_eq!((report.a, report.b), (h(1), h(2)));
        assert_eq!(report.d.value(), 3.0);
        qt.audit(&oracle).unwrap();

        // Deleting the highest slot shrinks without renumbering.
        qt.delete(&oracle, h(1)).unwrap();
        assert!(qt.closest_pair(&oracle).unwrap().is_none());
        assert!(qt.contains(h(2)));
    }

    #[test]
    fn update_distance_retires_the_minimum_pair() {
        let oracle = matrix_oracle(vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 6.0],
            vec![5.0, 6.0, 0.0],
        ]);
        let mut qt = Quadtree::new();
        for i in 0..3 {
            qt.insert(&oracle, h(i)).unwrap();
        }
        oracle.set_infinite(h(0), h(1));
        qt.update_distance(&oracle, h(0), h(1)).unwrap();
        let report = qt.closest_pair(&oracle).unwrap().unwrap();
        assert_eq!((report.a, report.b), (h(0), h(2)));
        assert_eq!(report.d.value(), 5.0);
        assert!(qt.last_base_writes() + qt.last_level_writes() <= 2 + 1);
        qt.audit(&oracle).unwrap();
    }

    #[test]
    fn update_of_a_non_minimal_pair_leaves_the_root() {
        let oracle = matrix_oracle(vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 6.0],
            vec![5.0, 6.0, 0.0],
        ]);
        let mut qt = Quadtree::new();
        for i in 0..3 {
            qt.insert(&oracle, h(i)).unwrap();
        }
        oracle.set_infinite(h(1), h(2));
        qt.update_distance(&oracle, h(1), h(2)).unwrap();
        let report = qt.closest_pair(&oracle).unwrap().unwrap();
        assert_eq!((report.a, report.b), (h(0), h(1)));
        assert_eq!(report.d.value(), 1.0);
    }

    #[test]
    fn capacity_is_a_hard_error() {
        let oracle = DistanceOracle::new(|_, _| 1.0);
        let mut qt = Quadtree::with_capacity(2);
        qt.insert(&oracle, h(0)).unwrap();
        qt.insert(&oracle, h(1)).unwrap();
        assert!(matches!(
            qt.insert(&oracle, h(2)),
            Err(Error::CapacityExceeded { capacity: 2, .. })
        ));
        assert_eq!(qt.len(), 2);
    }

    #[test]
    fn cell_count_stays_under_two_thirds_quadratic() {
        let oracle = DistanceOracle::new(|a, b| (a + b) as f64);
        let mut qt = Quadtree::new();
        for i in 0..130u64 {
            qt.insert(&oracle, h(i)).unwrap();
            let n = qt.len();
            assert!(
                qt.cell_count() <= 2 * n * n / 3 + 2 * n,
                "cell count {} over bound at n={n}",
                qt.cell_count()
            );
        }
    }
}
