//! Greedy matching: repeatedly select and remove the closest pair. For
//! maximum-weight matching, run the same driver on a negated oracle. The
//! result lexicographically minimizes the sorted edge-weight sequence over
//! all maximal matchings, which also makes it meaningful for non-numeric
//! distance orders.

use std::collections::BTreeSet;

use crate::distance::OrderedDistance;
use crate::error::Error;
use crate::handle::PointHandle;
use crate::oracle::DistanceOracle;
use crate::structure::ClosestPairStructure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchedPair {
    pub a: PointHandle,
    pub b: PointHandle,
    pub dist: OrderedDistance,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    /// Pairs in selection order (ascending distance).
    pub pairs: Vec<MatchedPair>,
    /// The one point left over when the input size is odd.
    pub unmatched: Option<PointHandle>,
}

impl Matching {
    /// Checks disjointness and coverage of all points except at most one.
    pub fn validate(&self, points: &[PointHandle]) -> Result<(), String> {
        let mut seen = BTreeSet::new();
        for p in &self.pairs {
            if p.a == p.b {
                return Err(format!("pair matches {} with itself", p.a));
            }
            for h in [p.a, p.b] {
                if !seen.insert(h.id()) {
                    return Err(format!("handle {h} matched twice"));
                }
            }
        }
        if let Some(left) = self.unmatched {
            if !seen.insert(left.id()) {
                return Err(format!("leftover {left} also appears in a pair"));
            }
        }
        let expect: BTreeSet<u64> = points.iter().map(|p| p.id()).collect();
        if seen != expect {
            return Err("matching does not cover the point set".into());
        }
        if (points.len() % 2 == 1) != self.unmatched.is_some() {
            return Err("leftover does not fit the input parity".into());
        }
        Ok(())
    }

    /// Sorted weight sequence, the object greedy matching lexicographically
    /// minimizes.
    pub fn sorted_weights(&self) -> Vec<OrderedDistance> {
        let mut w: Vec<OrderedDistance> = self.pairs.iter().map(|p| p.dist).collect();
        w.sort();
        w
    }

    /// CSV of matched pairs plus total weight.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,b,dist\n");
        let mut total = 0.0;
        for p in &self.pairs {
            out.push_str(&format!("{},{},{}\n", p.a, p.b, p.dist));
            total += p.dist.value();
        }
        if let Some(left) = self.unmatched {
            out.push_str(&format!("unmatched,{left},\n"));
        }
        out.push_str(&format!("total_weight,{total}\n"));
        out
    }
}

/// Matches `points` by repeatedly extracting the structure's closest pair.
pub fn greedy_matching(
    oracle: &DistanceOracle,
    points: &[PointHandle],
    backend: &mut dyn ClosestPairStructure,
) -> Result<Matching, Error> {
    backend.bulk_init(oracle, points)?;
    let mut alive: BTreeSet<PointHandle> = points.iter().copied().collect();
    let mut pairs = Vec::with_capacity(points.len() / 2);
    while alive.len() >= 2 {
        let report = backend
            .closest_pair(oracle)?
            .expect("two or more points remain");
        backend.delete(oracle, report.a)?;
        backend.delete(oracle, report.b)?;
        alive.remove(&report.a);
        alive.remove(&report.b);
        pairs.push(MatchedPair {
            a: report.a,
            b: report.b,
            dist: report.d,
        });
    }
    Ok(Matching {
        pairs,
        unmatched: alive.into_iter().next(),
    })
}

/// Reference greedy matching over a fully sorted distance list.
pub fn reference_greedy_matching(
    oracle: &DistanceOracle,
    points: &[PointHandle],
) -> Result<Matching, Error> {
    let n = points.len();
    let mut all: Vec<(OrderedDistance, PointHandle, PointHandle)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = if points[i] <= points[j] {
                (points[i], points[j])
            } else {
                (points[j], points[i])
            };
            all.push((oracle.raw(a, b)?, a, b));
        }
    }
    all.sort();
    let mut matched = BTreeSet::new();
    let mut pairs = Vec::with_capacity(n / 2);
    for (d, a, b) in all {
        if matched.contains(&a) || matched.contains(&b) {
            continue;
        }
        matched.insert(a);
        matched.insert(b);
        pairs.push(MatchedPair { a, b, dist: d });
    }
    let unmatched = points.iter().copied().find(|p| !matched.contains(p));
    Ok(Matching { pairs, unmatched })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::BruteForce;

    fn h(i: u64) -> PointHandle {
        PointHandle::new(i)
    }

    fn points(n: u64) -> Vec<PointHandle> {
        (0..n).map(h).collect()
    }

    #[test]
    fn one_dimensional_example() {
        // Points at {0, 1, 3, 7}: greedy takes (0,1) then (3,7).
        let coords = [0.0_f64, 1.0, 3.0, 7.0];
        let oracle = DistanceOracle::new(move |a, b| (coords[a as usize] - coords[b as usize]).abs());
        let mut backend = BruteForce::new();
        let m = greedy_matching(&oracle, &points(4), &mut backend).unwrap();
        m.validate(&points(4)).unwrap();
        assert_eq!(m.pairs.len(), 2);
        assert_eq!((m.pairs[0].a, m.pairs[0].b), (h(0), h(1)));
        assert_eq!((m.pairs[1].a, m.pairs[1].b), (h(2), h(3)));
        assert!(m.unmatched.is_none());

        let reference = reference_greedy_matching(&oracle, &points(4)).unwrap();
        assert_eq!(m, reference);
    }

    #[test]
    fn single_point_is_left_over() {
        let oracle = DistanceOracle::new(|_, _| 1.0);
        let mut backend = BruteForce::new();
        let m = greedy_matching(&oracle, &points(1), &mut backend).unwrap();
        assert!(m.pairs.is_empty());
        assert_eq!(m.unmatched, Some(h(0)));
        m.validate(&points(1)).unwrap();
    }

    #[test]
    fn empty_input_is_fine() {
        let oracle = DistanceOracle::new(|_, _| 1.0);
        let mut backend = BruteForce::new();
        let m = greedy_matching(&oracle, &[], &mut backend).unwrap();
        assert!(m.pairs.is_empty());
        assert!(m.unmatched.is_none());
    }

    #[test]
    fn validator_catches_overlap() {
        let bad = Matching {
            pairs: vec![
                MatchedPair {
                    a: h(0),
                    b: h(1),
                    dist: OrderedDistance::finite(1.0),
                },
                MatchedPair {
                    a: h(1),
                    b: h(2),
                    dist: OrderedDistance::finite(1.0),
                },
            ],
            unmatched: None,
        };
        assert!(bad.validate(&points(3)).is_err());
    }
}
