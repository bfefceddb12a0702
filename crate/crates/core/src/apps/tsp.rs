//! TSP construction heuristics driven by a dynamic closest-pair structure.
//!
//! The multiple-fragment heuristic maintains the set of fragment endpoints
//! with infinite distance between endpoints of the same fragment; cheapest
//! insertion maintains a mixed set of tour-edge objects and uninserted
//! sites where the edge-site distance is the splice cost. Each driver has
//! an independent sort/scan reference implementation used for
//! verification.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use crate::error::Error;
use crate::handle::PointHandle;
use crate::oracle::DistanceOracle;
use crate::structure::ClosestPairStructure;

/// A cyclic visiting order plus its total length under the site metric.
#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    pub order: Vec<PointHandle>,
    pub length: f64,
}

impl Tour {
    /// The tour as an undirected edge set (normalized id pairs, including
    /// the closing edge), which is the right representation for comparing
    /// tours that may start anywhere or run in either direction.
    pub fn edge_set(&self) -> BTreeSet<(u64, u64)> {
        let mut edges = BTreeSet::new();
        let n = self.order.len();
        for i in 0..n {
            let a = self.order[i].id();
            let b = self.order[(i + 1) % n].id();
            edges.insert((a.min(b), a.max(b)));
        }
        edges
    }

    /// Checks that the order is a permutation of `points`.
    pub fn validate(&self, points: &[PointHandle]) -> Result<(), String> {
        if self.order.len() != points.len() {
            return Err(format!(
                "tour visits {} of {} points",
                self.order.len(),
                points.len()
            ));
        }
        let expect: BTreeSet<u64> = points.iter().map(|p| p.id()).collect();
        let seen: BTreeSet<u64> = self.order.iter().map(|p| p.id()).collect();
        if expect != seen {
            return Err("tour is not a permutation of the input points".into());
        }
        Ok(())
    }

    /// CSV with the visiting order and total length.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("position,handle\n");
        for (i, p) in self.order.iter().enumerate() {
            out.push_str(&format!("{i},{p}\n"));
        }
        out.push_str(&format!("total_length,{}\n", self.length));
        out
    }
}

/// A tour plus the evaluations consumed on the driver's derived oracle.
pub struct TspRun {
    pub tour: Tour,
    pub derived_evals: u64,
}

fn tour_length(oracle: &DistanceOracle, order: &[PointHandle]) -> Result<f64, Error> {
    let n = order.len();
    let mut total = 0.0;
    for i in 0..n {
        total += oracle.raw(order[i], order[(i + 1) % n])?.value();
    }
    Ok(total)
}

struct FragmentState {
    // Fragment id per current endpoint, and each endpoint's other end
    // (itself for a trivial one-point fragment).
    frag: HashMap<u64, u64>,
    other: HashMap<u64, u64>,
}

/// Multiple-fragment heuristic: repeatedly join the closest pair of
/// endpoints belonging to distinct fragments. An endpoint that becomes
/// interior to its fragment is deleted from the structure; the distance
/// between the two ends of a freshly combined fragment is retired via
/// `invalidate_pair`.
pub fn multifragment_tsp(
    oracle: &DistanceOracle,
    points: &[PointHandle],
    backend: &mut dyn ClosestPairStructure,
) -> Result<TspRun, Error> {
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let state = Arc::new(Mutex::new(FragmentState {
        frag: points.iter().map(|p| (p.id(), p.id())).collect(),
        other: points.iter().map(|p| (p.id(), p.id())).collect(),
    }));
    let reader = Arc::clone(&state);
    let base = oracle.clone();
    let endpoint_oracle = DistanceOracle::new(move |a, b| {
        let st = reader.lock().unwrap();
        match (st.frag.get(&a), st.frag.get(&b)) {
            (Some(fa), Some(fb)) if fa == fb => f64::INFINITY,
            _ => base
                .raw(PointHandle::new(a), PointHandle::new(b))
                .map(|d| d.value())
                .unwrap_or(f64::NAN),
        }
    });
    backend.bulk_init(&endpoint_oracle, points)?;

    let mut path_edges: Vec<(PointHandle, PointHandle)> = Vec::with_capacity(n - 1);
    let mut fragments = n;
    while fragments > 1 {
        let report = backend
            .closest_pair(&endpoint_oracle)?
            .expect("distinct fragments still exist");
        let (a, b) = (report.a, report.b);
        path_edges.push((a, b));
        let (ea, eb) = {
            let mut st = state.lock().unwrap();
            let ea = st.other[&a.id()];
            let eb = st.other[&b.id()];
            let merged = st.frag[&a.id()];
            // New endpoints are the far ends; the joined endpoints become
            // interior when their fragment was nontrivial.
            if ea != a.id() {
                st.frag.remove(&a.id());
                st.other.remove(&a.id());
            }
            if eb != b.id() {
                st.frag.remove(&b.id());
                st.other.remove(&b.id());
            }
            st.frag.insert(ea, merged);
            st.frag.insert(eb, merged);
            st.other.insert(ea, eb);
            st.other.insert(eb, ea);
            (PointHandle::new(ea), PointHandle::new(eb))
        };
        if ea != a {
            backend.delete(&endpoint_oracle, a)?;
        }
        if eb != b {
            backend.delete(&endpoint_oracle, b)?;
        }
        fragments -= 1;
        if fragments > 1 {
            // The combined fragment's two ends now read as infinite; drop
            // any stored candidate for that pair.
            backend.invalidate_pair(&endpoint_oracle, ea, eb)?;
        }
    }

    let order = walk_path(points, &path_edges);
    let length = tour_length(oracle, &order)?;
    Ok(TspRun {
        tour: Tour { order, length },
        derived_evals: endpoint_oracle.eval_count(),
    })
}

/// Reference multiple-fragment construction: consider all edges in sorted
/// order and keep one whenever it joins endpoints of distinct fragments.
pub fn reference_multifragment(
    oracle: &DistanceOracle,
    points: &[PointHandle],
) -> Result<Tour, Error> {
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let mut all: Vec<(f64, u64, u64)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let d = oracle.raw(points[i], points[j])?.value();
            let (a, b) = (points[i].id(), points[j].id());
            all.push((d, a.min(b), a.max(b)));
        }
    }
    all.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let mut degree: HashMap<u64, usize> = HashMap::new();
    let mut dsu: HashMap<u64, u64> = points.iter().map(|p| (p.id(), p.id())).collect();
    fn find(dsu: &mut HashMap<u64, u64>, x: u64) -> u64 {
        let parent = dsu[&x];
        if parent == x {
            return x;
        }
        let root = find(dsu, parent);
        dsu.insert(x, root);
        root
    }
    let mut path_edges = Vec::with_capacity(n - 1);
    for (_, a, b) in all {
        if path_edges.len() == n - 1 {
            break;
        }
        if *degree.get(&a).unwrap_or(&0) >= 2 || *degree.get(&b).unwrap_or(&0) >= 2 {
            continue;
        }
        let (ra, rb) = (find(&mut dsu, a), find(&mut dsu, b));
        if ra == rb {
            continue;
        }
        dsu.insert(ra, rb);
        *degree.entry(a).or_insert(0) += 1;
        *degree.entry(b).or_insert(0) += 1;
        path_edges.push((PointHandle::new(a), PointHandle::new(b)));
    }
    let order = walk_path(points, &path_edges);
    let length = tour_length(oracle, &order)?;
    Ok(Tour { order, length })
}

/// Reconstructs the visiting order from the `n - 1` path edges (the
/// closing edge is implicit). Starts at the lowest-id path endpoint.
fn walk_path(points: &[PointHandle], path_edges: &[(PointHandle, PointHandle)]) -> Vec<PointHandle> {
    let mut adjacency: HashMap<u64, Vec<u64>> = HashMap::new();
    for &(a, b) in path_edges {
        adjacency.entry(a.id()).or_default().push(b.id());
        adjacency.entry(b.id()).or_default().push(a.id());
    }
    let start = points
        .iter()
        .map(|p| p.id())
        .filter(|id| adjacency.get(id).map_or(0, |v| v.len()) <= 1)
        .min()
        .expect("a path has endpoints");
    let mut order = Vec::with_capacity(points.len());
    let mut prev: Option<u64> = None;
    let mut at = start;
    loop {
        order.push(PointHandle::new(at));
        let next = adjacency
            .get(&at)
            .into_iter()
            .flatten()
            .copied()
            .find(|&x| Some(x) != prev);
        match next {
            Some(x) => {
                prev = Some(at);
                at = x;
            }
            None => break,
        }
    }
    order
}

/// One cheapest-insertion step: `site` was spliced into tour edge
/// `between`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Insertion {
    pub site: PointHandle,
    pub between: (PointHandle, PointHandle),
}

pub struct CheapestInsertionRun {
    pub tour: Tour,
    pub insertions: Vec<Insertion>,
    pub derived_evals: u64,
}

enum TourObject {
    Site(PointHandle),
    Edge(PointHandle, PointHandle),
}

/// Cheapest insertion: starting from the closest pair of sites as a
/// two-edge subtour, repeatedly find the (tour edge, uninserted site) pair
/// whose splice `d(a,s) + d(s,b) - d(a,b)` is cheapest, replace that edge
/// by two edges through the site, and repeat until every site is on the
/// tour. Edge objects and sites live together in one dynamic set; every
/// other kind of pair is infinitely far apart.
pub fn cheapest_insertion_tsp(
    oracle: &DistanceOracle,
    points: &[PointHandle],
    backend: &mut dyn ClosestPairStructure,
) -> Result<CheapestInsertionRun, Error> {
    let n = points.len();
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: n });
    }
    // Initial subtour: the globally closest pair of sites, found by a
    // direct scan (counted against the site oracle).
    let mut first: Option<(usize, usize)> = None;
    let mut first_d = None;
    for i in 0..n {
        for j in i + 1..n {
            let d = oracle.eval(points[i], points[j])?;
            if first_d.is_none_or(|bd| d < bd) {
                first_d = Some(d);
                first = Some((i, j));
            }
        }
    }
    let (ia, ib) = first.expect("n >= 3");
    let (a, b) = (points[ia], points[ib]);

    let mut next_id = points.iter().map(|p| p.id()).max().unwrap() + 1;
    let mut alloc = move || {
        let id = next_id;
        next_id += 1;
        PointHandle::new(id)
    };

    let objects: Arc<Mutex<HashMap<u64, TourObject>>> = Arc::new(Mutex::new(HashMap::new()));
    let reader = Arc::clone(&objects);
    let base = oracle.clone();
    let splice_oracle = DistanceOracle::new(move |x, y| {
        let objs = reader.lock().unwrap();
        let cost = |u: PointHandle, v: PointHandle, s: PointHandle| -> f64 {
            let duv = base.raw(u, v).map(|d| d.value()).unwrap_or(f64::NAN);
            let dus = base.raw(u, s).map(|d| d.value()).unwrap_or(f64::NAN);
            let dsv = base.raw(s, v).map(|d| d.value()).unwrap_or(f64::NAN);
            dus + dsv - duv
        };
        match (objs.get(&x), objs.get(&y)) {
            (Some(TourObject::Edge(u, v)), Some(TourObject::Site(s)))
            | (Some(TourObject::Site(s)), Some(TourObject::Edge(u, v))) => cost(*u, *v, *s),
            _ => f64::INFINITY,
        }
    });

    let e1 = alloc();
    let e2 = alloc();
    let mut initial = Vec::with_capacity(n);
    {
        let mut objs = objects.lock().unwrap();
        objs.insert(e1.id(), TourObject::Edge(a, b));
        objs.insert(e2.id(), TourObject::Edge(b, a));
        initial.push(e1);
        initial.push(e2);
        for &p in points {
            if p != a && p != b {
                objs.insert(p.id(), TourObject::Site(p));
                initial.push(p);
            }
        }
    }
    backend.bulk_init(&splice_oracle, &initial)?;

    let mut succ: HashMap<u64, u64> = HashMap::new();
    succ.insert(a.id(), b.id());
    succ.insert(b.id(), a.id());
    let mut insertions = Vec::with_capacity(n - 2);
    for _ in 0..n - 2 {
        let report = backend
            .closest_pair(&splice_oracle)?
            .expect("edges and sites remain");
        let (edge_handle, u, v, site) = {
            let objs = objects.lock().unwrap();
            match (objs.get(&report.a.id()), objs.get(&report.b.id())) {
                (Some(TourObject::Edge(u, v)), Some(TourObject::Site(s))) => {
                    (report.a, *u, *v, *s)
                }
                (Some(TourObject::Site(s)), Some(TourObject::Edge(u, v))) => {
                    (report.b, *u, *v, *s)
                }
                _ => unreachable!("minimum pair is always edge-site"),
            }
        };
        backend.delete(&splice_oracle, edge_handle)?;
        backend.delete(&splice_oracle, site)?;
        let n1 = alloc();
        let n2 = alloc();
        {
            let mut objs = objects.lock().unwrap();
            objs.remove(&edge_handle.id());
            objs.remove(&site.id());
            objs.insert(n1.id(), TourObject::Edge(u, site));
            objs.insert(n2.id(), TourObject::Edge(site, v));
        }
        backend.insert(&splice_oracle, n1)?;
        backend.insert(&splice_oracle, n2)?;
        succ.insert(u.id(), site.id());
        succ.insert(site.id(), v.id());
        insertions.push(Insertion {
            site,
            between: (u, v),
        });
    }

    let start = a.min(b);
    let mut order = Vec::with_capacity(n);
    let mut at = start.id();
    for _ in 0..n {
        order.push(PointHandle::new(at));
        at = succ[&at];
    }
    let length = tour_length(oracle, &order)?;
    Ok(CheapestInsertionRun {
        tour: Tour { order, length },
        insertions,
        derived_evals: splice_oracle.eval_count(),
    })
}

/// Reference cheapest insertion: a quadratic scan over (tour edge,
/// uninserted site) pairs at every step, no closest-pair structure.
pub fn reference_cheapest_insertion(
    oracle: &DistanceOracle,
    points: &[PointHandle],
) -> Result<CheapestInsertionRun, Error> {
    let n = points.len();
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: n });
    }
    let mut first: Option<(usize, usize)> = None;
    let mut first_d: Option<f64> = None;
    for i in 0..n {
        for j in i + 1..n {
            let d = oracle.raw(points[i], points[j])?.value();
            if first_d.is_none_or(|bd| d < bd) {
                first_d = Some(d);
                first = Some((i, j));
            }
        }
    }
    let (ia, ib) = first.expect("n >= 3");
    let (a, b) = (points[ia], points[ib]);
    let mut succ: HashMap<u64, u64> = HashMap::new();
    succ.insert(a.id(), b.id());
    succ.insert(b.id(), a.id());
    let mut remaining: Vec<PointHandle> = points.iter().copied().filter(|&p| p != a && p != b).collect();
    remaining.sort_unstable();

    let start = a.min(b);
    let mut insertions = Vec::with_capacity(n - 2);
    while !remaining.is_empty() {
        let mut best: Option<(f64, usize, u64, u64)> = None;
        // Tour edges in walking order from the fixed start, sites in
        // ascending handle order; strict improvement keeps the first.
        for (si, s) in remaining.iter().enumerate() {
            let mut u = start.id();
            loop {
                let v = succ[&u];
                let duv = oracle.raw(PointHandle::new(u), PointHandle::new(v))?.value();
                let dus = oracle.raw(PointHandle::new(u), *s)?.value();
                let dsv = oracle.raw(*s, PointHandle::new(v))?.value();
                let cost = dus + dsv - duv;
                if best.is_none_or(|(bc, _, _, _)| cost < bc) {
                    best = Some((cost, si, u, v));
                }
                u = v;
                if u == start.id() {
                    break;
                }
            }
        }
        let (_, si, u, v) = best.expect("tour has edges");
        let s = remaining.remove(si);
        succ.insert(u, s.id());
        succ.insert(s.id(), v);
        insertions.push(Insertion {
            site: s,
            between: (PointHandle::new(u), PointHandle::new(v)),
        });
    }
    let mut order = Vec::with_capacity(n);
    let mut at = start.id();
    for _ in 0..n {
        order.push(PointHandle::new(at));
        at = succ[&at];
    }
    let length = tour_length(oracle, &order)?;
    Ok(CheapestInsertionRun {
        tour: Tour { order, length },
        insertions,
        derived_evals: 0,
    })
}
