//! Bottom-up agglomerative clustering: repeatedly find the closest pair of
//! clusters, delete both from the structure, and insert one object
//! representing the merged cluster.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use crate::error::Error;
use crate::handle::PointHandle;
use crate::oracle::DistanceOracle;
use crate::structure::ClosestPairStructure;

/// Recurrence-based definitions of inter-cluster distance. Each one
/// computes `d(k, i∪j)` in constant time from `d(k,i)`, `d(k,j)`, `d(i,j)`
/// and the cluster sizes via the standard combination coefficients
/// `(α_i, α_j, β, γ)`:
///
/// `d(k, i∪j) = α_i·d(k,i) + α_j·d(k,j) + β·d(i,j) + γ·|d(k,i) − d(k,j)|`
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkageKind {
    Single,
    Complete,
    /// Unweighted group average (UPGMA).
    Average,
    /// Weighted group average (WPGMA).
    Weighted,
    Median,
    Centroid,
    Ward,
}

impl LinkageKind {
    pub const ALL: [LinkageKind; 7] = [
        LinkageKind::Single,
        LinkageKind::Complete,
        LinkageKind::Average,
        LinkageKind::Weighted,
        LinkageKind::Median,
        LinkageKind::Centroid,
        LinkageKind::Ward,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LinkageKind::Single => "single",
            LinkageKind::Complete => "complete",
            LinkageKind::Average => "average",
            LinkageKind::Weighted => "weighted",
            LinkageKind::Median => "median",
            LinkageKind::Centroid => "centroid",
            LinkageKind::Ward => "ward",
        }
    }

    pub fn parse(s: &str) -> Result<LinkageKind, Error> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::BadInstance(format!("unknown linkage '{s}'")))
    }

    fn coefficients(self, ni: usize, nj: usize, nk: usize) -> (f64, f64, f64, f64) {
        let (ni, nj, nk) = (ni as f64, nj as f64, nk as f64);
        match self {
            LinkageKind::Single => (0.5, 0.5, 0.0, -0.5),
            LinkageKind::Complete => (0.5, 0.5, 0.0, 0.5),
            LinkageKind::Average => (ni / (ni + nj), nj / (ni + nj), 0.0, 0.0),
            LinkageKind::Weighted => (0.5, 0.5, 0.0, 0.0),
            LinkageKind::Median => (0.5, 0.5, -0.25, 0.0),
            LinkageKind::Centroid => {
                let s = ni + nj;
                (ni / s, nj / s, -(ni * nj) / (s * s), 0.0)
            }
            LinkageKind::Ward => {
                let t = ni + nj + nk;
                ((ni + nk) / t, (nj + nk) / t, -nk / t, 0.0)
            }
        }
    }
}

/// How inter-cluster distances are produced during a run.
pub enum LinkageRule {
    /// Distances live in an auxiliary map maintained by the recurrence;
    /// the backend sees cluster ids as objects and reads that map. Needs
    /// finite numeric leaf distances.
    Recurrence(LinkageKind),
    /// Clusters are represented by objects: the callback is told
    /// `(left, right, new)` ids at each merge and must make the caller's
    /// oracle answer distances for the `new` id. The backend then reads the
    /// caller's oracle directly.
    Representative(Box<dyn FnMut(u64, u64, u64) + Send>),
}

/// One merge row: `left` and `right` are the merged cluster ids, `id` the
/// id of the merged cluster. Leaves are `0..n-1`, merged clusters
/// `n..2n-2` in merge order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: u64,
    pub right: u64,
    pub distance: f64,
    pub id: u64,
}

/// A stepwise dendrogram: exactly `n - 1` merges over leaf ids `0..n-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub n: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// Structural check: one merge short of the object count, every id
    /// except the final root used as a child exactly once, children
    /// created before their parent.
    pub fn validate(&self) -> Result<(), String> {
        if self.n == 0 {
            if self.merges.is_empty() {
                return Ok(());
            }
            return Err("merges on an empty dendrogram".into());
        }
        if self.merges.len() != self.n - 1 {
            return Err(format!(
                "expected {} merges, found {}",
                self.n - 1,
                self.merges.len()
            ));
        }
        let total = 2 * self.n - 1;
        let mut used = vec![false; total];
        for (step, m) in self.merges.iter().enumerate() {
            let expected_id = (self.n + step) as u64;
            if m.id != expected_id {
                return Err(format!("merge {step} created id {} != {expected_id}", m.id));
            }
            for child in [m.left, m.right] {
                if child >= expected_id {
                    return Err(format!("merge {step} uses not-yet-created id {child}"));
                }
                if used[child as usize] {
                    return Err(format!("id {child} used as a child twice"));
                }
                used[child as usize] = true;
            }
        }
        if self.n > 0 && used[total - 1] {
            return Err("root used as a child".into());
        }
        Ok(())
    }

    /// The multiset of merge distances (sorted ascending).
    pub fn merge_distances(&self) -> Vec<f64> {
        let mut d: Vec<f64> = self.merges.iter().map(|m| m.distance).collect();
        d.sort_by(f64::total_cmp);
        d
    }

    /// Newick serialization with branch lengths derived from merge
    /// heights (a child's branch length is its parent's height minus its
    /// own; leaves sit at height zero). Non-monotone linkages can yield
    /// negative lengths, which Newick tolerates.
    pub fn to_newick(&self) -> String {
        match self.n {
            0 => return ";".to_string(),
            1 => return "0;".to_string(),
            _ => {}
        }
        let total = 2 * self.n - 1;
        let mut children: Vec<Option<(u64, u64)>> = vec![None; total];
        let mut height = vec![0.0_f64; total];
        for m in &self.merges {
            children[m.id as usize] = Some((m.left, m.right));
            height[m.id as usize] = m.distance;
        }
        fn write(id: u64, children: &[Option<(u64, u64)>], height: &[f64], out: &mut String) {
            match children[id as usize] {
                None => out.push_str(&id.to_string()),
                Some((l, r)) => {
                    let h = height[id as usize];
                    out.push('(');
                    write(l, children, height, out);
                    out.push_str(&format!(":{}", h - height[l as usize]));
                    out.push(',');
                    write(r, children, height, out);
                    out.push_str(&format!(":{}", h - height[r as usize]));
                    out.push(')');
                }
            }
        }
        let mut out = String::new();
        write((total - 1) as u64, &children, &height, &mut out);
        out.push(';');
        out
    }

    /// Flat CSV of merge rows.
    pub fn to_merge_csv(&self) -> String {
        let mut out = String::from("left,right,distance,new_id\n");
        for m in &self.merges {
            out.push_str(&format!("{},{},{},{}\n", m.left, m.right, m.distance, m.id));
        }
        out
    }
}

/// Output of one clustering run together with the evaluations its internal
/// cluster oracle consumed (zero for representative linkage, which reads
/// the caller's oracle directly).
#[derive(Debug)]
pub struct AgglomerateRun {
    pub dendrogram: Dendrogram,
    pub derived_evals: u64,
}

fn key(a: u64, b: u64) -> (u64, u64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Clusters leaves `0..n-1` (as handles) whose pairwise distances come
/// from `oracle`. Merged clusters get ids `n..2n-2` in merge order.
pub fn agglomerate(
    oracle: &DistanceOracle,
    n: usize,
    linkage: LinkageRule,
    backend: &mut dyn ClosestPairStructure,
) -> Result<AgglomerateRun, Error> {
    match linkage {
        LinkageRule::Recurrence(kind) => agglomerate_recurrence(oracle, n, kind, backend),
        LinkageRule::Representative(combine) => {
            agglomerate_representative(oracle, n, combine, backend)
        }
    }
}

fn agglomerate_recurrence(
    oracle: &DistanceOracle,
    n: usize,
    kind: LinkageKind,
    backend: &mut dyn ClosestPairStructure,
) -> Result<AgglomerateRun, Error> {
    let mut merges = Vec::new();
    if n < 2 {
        return Ok(AgglomerateRun {
            dendrogram: Dendrogram { n, merges },
            derived_evals: 0,
        });
    }
    // Seed the inter-cluster distance map with all leaf pairs; from then
    // on the recurrence keeps it current and the backend only ever reads
    // the map (each read counts as one evaluation on the cluster oracle).
    let map: Arc<Mutex<HashMap<(u64, u64), f64>>> = Arc::new(Mutex::new(HashMap::new()));
    {
        let mut seeded = map.lock().unwrap();
        for i in 0..n as u64 {
            for j in i + 1..n as u64 {
                let d = oracle.eval(PointHandle::new(i), PointHandle::new(j))?;
                if d.is_infinite() {
                    return Err(Error::NonFiniteClusterDistance(
                        PointHandle::new(i),
                        PointHandle::new(j),
                    ));
                }
                seeded.insert((i, j), d.value());
            }
        }
    }
    let reader = Arc::clone(&map);
    let cluster_oracle = DistanceOracle::new(move |a, b| {
        // A missing key is a bookkeeping bug; NaN surfaces it as an error.
        reader
            .lock()
            .unwrap()
            .get(&key(a, b))
            .copied()
            .unwrap_or(f64::NAN)
    });

    let leaves: Vec<PointHandle> = (0..n as u64).map(PointHandle::new).collect();
    backend.bulk_init(&cluster_oracle, &leaves)?;

    let mut sizes: Vec<usize> = vec![1; n];
    let mut active: BTreeSet<u64> = (0..n as u64).collect();
    for step in 0..n - 1 {
        let report = backend
            .closest_pair(&cluster_oracle)?
            .expect("two or more clusters are live");
        let (i, j) = (report.a.id(), report.b.id());
        let dij = report.d.value();
        let new_id = (n + step) as u64;
        active.remove(&i);
        active.remove(&j);
        let (ni, nj) = (sizes[i as usize], sizes[j as usize]);
        {
            let mut m = map.lock().unwrap();
            for &k in &active {
                let dki = m.remove(&key(k, i)).expect("distance to left cluster");
                let dkj = m.remove(&key(k, j)).expect("distance to right cluster");
                let (ai, aj, beta, gamma) = kind.coefficients(ni, nj, sizes[k as usize]);
                let dknew = ai * dki + aj * dkj + beta * dij + gamma * (dki - dkj).abs();
                m.insert(key(k, new_id), dknew);
            }
            m.remove(&key(i, j));
        }
        sizes.push(ni + nj);
        backend.delete(&cluster_oracle, report.a)?;
        backend.delete(&cluster_oracle, report.b)?;
        backend.insert(&cluster_oracle, PointHandle::new(new_id))?;
        active.insert(new_id);
        merges.push(Merge {
            left: i,
            right: j,
            distance: dij,
            id: new_id,
        });
    }
    Ok(AgglomerateRun {
        dendrogram: Dendrogram { n, merges },
        derived_evals: cluster_oracle.eval_count(),
    })
}

fn agglomerate_representative(
    oracle: &DistanceOracle,
    n: usize,
    mut combine: Box<dyn FnMut(u64, u64, u64) + Send>,
    backend: &mut dyn ClosestPairStructure,
) -> Result<AgglomerateRun, Error> {
    let mut merges = Vec::new();
    if n < 2 {
        return Ok(AgglomerateRun {
            dendrogram: Dendrogram { n, merges },
            derived_evals: 0,
        });
    }
    let leaves: Vec<PointHandle> = (0..n as u64).map(PointHandle::new).collect();
    backend.bulk_init(oracle, &leaves)?;
    for step in 0..n - 1 {
        let report = backend
            .closest_pair(oracle)?
            .expect("two or more clusters are live");
        let new_id = (n + step) as u64;
        // The caller registers the representative before the structure
        // evaluates any distance involving the new id.
        combine(report.a.id(), report.b.id(), new_id);
        backend.delete(oracle, report.a)?;
        backend.delete(oracle, report.b)?;
        backend.insert(oracle, PointHandle::new(new_id))?;
        merges.push(Merge {
            left: report.a.id(),
            right: report.b.id(),
            distance: report.d.value(),
            id: new_id,
        });
    }
    Ok(AgglomerateRun {
        dendrogram: Dendrogram { n, merges },
        derived_evals: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::BruteForce;

    fn line_oracle(points: Vec<f64>) -> DistanceOracle {
        DistanceOracle::new(move |a, b| (points[a as usize] - points[b as usize]).abs())
    }

    #[test]
    fn single_linkage_on_three_collinear_points() {
        // Points {0, 1, 3}: merge (0,1) at distance 1, then the merged
        // cluster meets 3 at min(3, 2) = 2.
        let oracle = line_oracle(vec![0.0, 1.0, 3.0]);
        let mut backend = BruteForce::new();
        let run = agglomerate(
            &oracle,
            3,
            LinkageRule::Recurrence(LinkageKind::Single),
            &mut backend,
        )
        .unwrap();
        let d: Vec<f64> = run.dendrogram.merges.iter().map(|m| m.distance).collect();
        assert_eq!(d, vec![1.0, 2.0]);
        run.dendrogram.validate().unwrap();
    }

    #[test]
    fn complete_linkage_on_three_collinear_points() {
        // Same points under complete linkage: 1 then max(3, 2) = 3.
        let oracle = line_oracle(vec![0.0, 1.0, 3.0]);
        let mut backend = BruteForce::new();
        let run = agglomerate(
            &oracle,
            3,
            LinkageRule::Recurrence(LinkageKind::Complete),
            &mut backend,
        )
        .unwrap();
        let d: Vec<f64> = run.dendrogram.merges.iter().map(|m| m.distance).collect();
        assert_eq!(d, vec![1.0, 3.0]);
    }

    #[test]
    fn trivial_sizes() {
        let oracle = line_oracle(vec![0.0]);
        let mut backend = BruteForce::new();
        let run = agglomerate(
            &oracle,
            1,
            LinkageRule::Recurrence(LinkageKind::Average),
            &mut backend,
        )
        .unwrap();
        assert!(run.dendrogram.merges.is_empty());
        run.dendrogram.validate().unwrap();
    }

    #[test]
    fn recurrence_rejects_infinite_leaf_distances() {
        let oracle = line_oracle(vec![0.0, 1.0, 3.0]);
        oracle.set_infinite(PointHandle::new(0), PointHandle::new(2));
        let mut backend = BruteForce::new();
        let err = agglomerate(
            &oracle,
            3,
            LinkageRule::Recurrence(LinkageKind::Average),
            &mut backend,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonFiniteClusterDistance(_, _)));
    }

    #[test]
    fn representative_linkage_tracks_caller_objects() {
        // 1-D points; the representative of a merge is the midpoint.
        let store = Arc::new(Mutex::new(vec![0.0_f64, 1.0, 7.0]));
        let reader = Arc::clone(&store);
        let oracle = DistanceOracle::new(move |a, b| {
            let s = reader.lock().unwrap();
            (s[a as usize] - s[b as usize]).abs()
        });
        let writer = Arc::clone(&store);
        let combine = Box::new(move |l: u64, r: u64, new: u64| {
            let mut s = writer.lock().unwrap();
            let mid = (s[l as usize] + s[r as usize]) / 2.0;
            assert_eq!(new as usize, s.len());
            s.push(mid);
        });
        let mut backend = BruteForce::new();
        let run = agglomerate(&oracle, 3, LinkageRule::Representative(combine), &mut backend)
            .unwrap();
        let d: Vec<f64> = run.dendrogram.merges.iter().map(|m| m.distance).collect();
        // (0,1) merge at 1; midpoint 0.5 meets 7 at 6.5.
        assert_eq!(d, vec![1.0, 6.5]);
    }

    #[test]
    fn newick_and_csv_exports() {
        let oracle = line_oracle(vec![0.0, 1.0, 3.0]);
        let mut backend = BruteForce::new();
        let run = agglomerate(
            &oracle,
            3,
            LinkageRule::Recurrence(LinkageKind::Single),
            &mut backend,
        )
        .unwrap();
        assert_eq!(run.dendrogram.to_newick(), "(2:2,(0:1,1:1):1);");
        assert_eq!(
            run.dendrogram.to_merge_csv(),
            "left,right,distance,new_id\n0,1,1,3\n2,3,2,4\n"
        );
    }

    #[test]
    fn validator_rejects_malformed_trees() {
        let bad = Dendrogram {
            n: 3,
            merges: vec![Merge {
                left: 0,
                right: 1,
                distance: 1.0,
                id: 3,
            }],
        };
        assert!(bad.validate().is_err());
    }
}
