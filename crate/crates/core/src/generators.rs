//! Deterministic seeded instance generators: uniform hypercube vectors
//! under four distance functions, a hierarchically clustered binary
//! fractal, random leaves of a binary tree, explicit random matrices, and
//! hash-derived pseudorandom pair distances. Every generator is replayable
//! from its spec; negation turns any minimization instance into the
//! corresponding maximization one.
//!
//! The PRNG is pinned to ChaCha8 seeded from the spec's 64-bit seed, so
//! instances are reproducible across runs and platforms.

use std::io::{self, BufRead, Write};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::handle::PointHandle;
use crate::oracle::DistanceOracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    UniformHypercube,
    XorFractal,
    TreeLeaves,
    RandomMatrix,
    PseudorandomPairs,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 5] = [
        InstanceKind::UniformHypercube,
        InstanceKind::XorFractal,
        InstanceKind::TreeLeaves,
        InstanceKind::RandomMatrix,
        InstanceKind::PseudorandomPairs,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InstanceKind::UniformHypercube => "uniform_hypercube",
            InstanceKind::XorFractal => "xor_fractal",
            InstanceKind::TreeLeaves => "tree_leaves",
            InstanceKind::RandomMatrix => "random_matrix",
            InstanceKind::PseudorandomPairs => "pseudorandom_pairs",
        }
    }

    pub fn parse(s: &str) -> Result<InstanceKind, Error> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::BadInstance(format!("unknown instance kind '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    L1,
    L2,
    LInf,
    /// Similarity, not a metric: by default the generator emits *negated*
    /// dot products so that "closest" means "most similar" in a
    /// minimization problem; the negate flag flips it back for MAX runs.
    DotProduct,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::L1, Metric::L2, Metric::LInf, Metric::DotProduct];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::L1 => "l1",
            Metric::L2 => "l2",
            Metric::LInf => "linf",
            Metric::DotProduct => "dot_product",
        }
    }

    pub fn parse(s: &str) -> Result<Metric, Error> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::BadInstance(format!("unknown metric '{s}'")))
    }
}

/// Everything needed to rebuild an instance bit-for-bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    pub n: usize,
    /// Vector dimension; tree depth for `tree_leaves`; total bit width for
    /// `xor_fractal`. Ignored by matrix and pseudorandom kinds.
    pub dim: usize,
    /// Distance function for `uniform_hypercube`; the other kinds carry
    /// their own inherent distance.
    pub metric: Metric,
    pub negate: bool,
    pub seed: u64,
}

enum InstanceData {
    Vectors(Arc<Vec<Vec<f64>>>),
    Bits {
        words: Arc<Vec<Vec<u64>>>,
        // Per point, the generator-subset chosen at each level; kept so
        // the hierarchical structure is checkable.
        choices: Arc<Vec<Vec<u8>>>,
    },
    Leaves(Arc<Vec<u64>>),
    Matrix(Arc<Vec<Vec<f64>>>),
    Hashed,
}

/// A generated object set with its distance oracle. Handles are `0..n-1`.
pub struct Instance {
    pub spec: InstanceSpec,
    pub handles: Vec<PointHandle>,
    pub oracle: DistanceOracle,
    data: InstanceData,
}

impl Instance {
    /// Coordinate rows for vector instances (uniform hypercube only).
    pub fn vectors(&self) -> Option<&[Vec<f64>]> {
        match &self.data {
            InstanceData::Vectors(v) => Some(v),
            _ => None,
        }
    }

    /// Per-point per-level generator choices of an `xor_fractal` instance.
    pub fn fractal_choices(&self) -> Option<&[Vec<u8>]> {
        match &self.data {
            InstanceData::Bits { choices, .. } => Some(choices),
            _ => None,
        }
    }

    /// Root-to-leaf bit paths of a `tree_leaves` instance.
    pub fn leaf_paths(&self) -> Option<&[u64]> {
        match &self.data {
            InstanceData::Leaves(paths) => Some(paths),
            _ => None,
        }
    }

    /// The explicit rows of a matrix-backed instance.
    pub fn matrix_rows(&self) -> Option<&[Vec<f64>]> {
        match &self.data {
            InstanceData::Matrix(rows) => Some(rows),
            _ => None,
        }
    }

    /// Writes the materialized distance matrix in lower-triangular text
    /// form: a count line, then one row per object, row `i` listing the
    /// `i` distances to objects `0..i`.
    pub fn write_matrix<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "{}", self.spec.n)?;
        for i in 0..self.spec.n as u64 {
            let mut row = Vec::with_capacity(i as usize);
            for j in 0..i {
                let d = self
                    .oracle
                    .raw(PointHandle::new(i), PointHandle::new(j))
                    .map_err(|e| io::Error::other(e.to_string()))?;
                row.push(format!("{}", d.value()));
            }
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }

    /// Writes vector coordinates as CSV (one row per point). Bit vectors
    /// dump as 0/1 columns.
    pub fn write_coords_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        match &self.data {
            InstanceData::Vectors(rows) => {
                for row in rows.iter() {
                    let cells: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
                    writeln!(w, "{}", cells.join(","))?;
                }
                Ok(())
            }
            InstanceData::Bits { words, .. } => {
                for point in words.iter() {
                    let bits: Vec<String> = (0..self.spec.dim)
                        .map(|b| ((point[b / 64] >> (b % 64)) & 1).to_string())
                        .collect();
                    writeln!(w, "{}", bits.join(","))?;
                }
                Ok(())
            }
            _ => Err(io::Error::other(
                "only vector instances dump coordinates",
            )),
        }
    }

    /// Builds an instance from an explicit symmetric distance matrix given
    /// as full square rows.
    pub fn from_explicit_matrix(rows: Vec<Vec<f64>>) -> Result<Instance, Error> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::BadInstance(format!(
                    "matrix row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, v) in row.iter().enumerate() {
                if v.is_nan() {
                    return Err(Error::BadInstance(format!("matrix entry ({i},{j}) is NaN")));
                }
                if (*v - rows[j][i]).abs() > 0.0 {
                    return Err(Error::BadInstance(format!(
                        "matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let data = Arc::new(rows);
        let spec = InstanceSpec {
            kind: InstanceKind::RandomMatrix,
            n,
            dim: 1,
            metric: Metric::L2,
            negate: false,
            seed: 0,
        };
        let lookup = Arc::clone(&data);
        let oracle = DistanceOracle::new(move |a, b| lookup[a as usize][b as usize]);
        Ok(Instance {
            spec,
            handles: (0..n as u64).map(PointHandle::new).collect(),
            oracle,
            data: InstanceData::Matrix(data),
        })
    }

    /// Parses the lower-triangular text format written by
    /// [`write_matrix`](Instance::write_matrix).
    pub fn read_matrix<R: BufRead>(r: &mut R) -> Result<Instance, Error> {
        let mut lines = r.lines();
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::BadInstance("empty matrix file".into()))?
            .map_err(|e| Error::BadInstance(e.to_string()))?
            .trim()
            .parse()
            .map_err(|e| Error::BadInstance(format!("bad count line: {e}")))?;
        let mut rows: Vec<Vec<f64>> = vec![vec![0.0; n]; n];
        for i in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| Error::BadInstance(format!("missing row {i}")))?
                .map_err(|e| Error::BadInstance(e.to_string()))?;
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|e| Error::BadInstance(format!("row {i}: {e}")))
                })
                .collect::<Result<_, _>>()?;
            if vals.len() != i {
                return Err(Error::BadInstance(format!(
                    "row {i} has {} entries, expected {i}",
                    vals.len()
                )));
            }
            for (j, v) in vals.into_iter().enumerate() {
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
        Self::from_explicit_matrix(rows)
    }
}

const FRACTAL_BLOCK_BITS: usize = 31;
const FRACTAL_GENERATORS: usize = 5;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit_from_hash(h: u64) -> f64 {
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Path-length distance between two leaves of a depth-`depth` binary tree:
/// `2 * (depth - longest common prefix)` of their root-to-leaf bit paths
/// (most significant of the low `depth` bits first).
pub fn tree_leaf_distance(a: u64, b: u64, depth: u32) -> f64 {
    let diff = (a ^ b) << (64 - depth);
    let common = diff.leading_zeros().min(depth);
    2.0 * (depth - common) as f64
}

fn wrap_negate(v: f64, negate: bool) -> f64 {
    if negate {
        -v
    } else {
        v
    }
}

/// Materializes an instance from its spec. Same spec, same instance.
pub fn generate(spec: InstanceSpec) -> Result<Instance, Error> {
    let n = spec.n;
    let negate = spec.negate;
    if matches!(
        spec.kind,
        InstanceKind::UniformHypercube | InstanceKind::XorFractal | InstanceKind::TreeLeaves
    ) && spec.dim == 0
    {
        return Err(Error::BadInstance("vector kinds need dim >= 1".into()));
    }
    if spec.metric == Metric::DotProduct && spec.kind != InstanceKind::UniformHypercube {
        return Err(Error::BadInstance(
            "dot_product is only defined for uniform_hypercube".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let handles: Vec<PointHandle> = (0..n as u64).map(PointHandle::new).collect();
    let (oracle, data) = match spec.kind {
        InstanceKind::UniformHypercube => {
            let points: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..spec.dim).map(|_| rng.random::<f64>()).collect())
                .collect();
            let points = Arc::new(points);
            let lookup = Arc::clone(&points);
            let metric = spec.metric;
            let oracle = DistanceOracle::new(move |a, b| {
                let (pa, pb) = (&lookup[a as usize], &lookup[b as usize]);
                let v = match metric {
                    Metric::L1 => pa.iter().zip(pb).map(|(x, y)| (x - y).abs()).sum(),
                    Metric::L2 => pa
                        .iter()
                        .zip(pb)
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                        .sqrt(),
                    Metric::LInf => pa
                        .iter()
                        .zip(pb)
                        .map(|(x, y)| (x - y).abs())
                        .fold(0.0, f64::max),
                    Metric::DotProduct => -pa.iter().zip(pb).map(|(x, y)| x * y).sum::<f64>(),
                };
                wrap_negate(v, negate)
            });
            (oracle, InstanceData::Vectors(points))
        }
        InstanceKind::XorFractal => {
            let levels = spec.dim.div_ceil(FRACTAL_BLOCK_BITS);
            let words_per_point = spec.dim.div_ceil(64);
            // Five random generator bit-vectors per level, each over that
            // level's private block of coordinates.
            let mut level_gens: Vec<Vec<Vec<u64>>> = Vec::with_capacity(levels);
            for level in 0..levels {
                let offset = level * FRACTAL_BLOCK_BITS;
                let width = FRACTAL_BLOCK_BITS.min(spec.dim - offset);
                let mut gens = Vec::with_capacity(FRACTAL_GENERATORS);
                for _ in 0..FRACTAL_GENERATORS {
                    let mut g = vec![0u64; words_per_point];
                    for bit in 0..width {
                        if rng.random::<bool>() {
                            let pos = offset + bit;
                            g[pos / 64] |= 1u64 << (pos % 64);
                        }
                    }
                    gens.push(g);
                }
                level_gens.push(gens);
            }
            let mut words: Vec<Vec<u64>> = Vec::with_capacity(n);
            let mut choices: Vec<Vec<u8>> = Vec::with_capacity(n);
            let subsets = (1u8 << FRACTAL_GENERATORS) - 1;
            for _ in 0..n {
                let mut point = vec![0u64; words_per_point];
                let mut choice = Vec::with_capacity(levels);
                for gens in &level_gens {
                    // A uniformly random nonempty generator subset, XORed
                    // together within the level's block.
                    let subset = rng.random_range(1..=subsets);
                    choice.push(subset);
                    for (gi, g) in gens.iter().enumerate() {
                        if subset & (1 << gi) != 0 {
                            for (w, gw) in point.iter_mut().zip(g) {
                                *w ^= gw;
                            }
                        }
                    }
                }
                words.push(point);
                choices.push(choice);
            }
            let words = Arc::new(words);
            let lookup = Arc::clone(&words);
            let oracle = DistanceOracle::new(move |a, b| {
                let (pa, pb) = (&lookup[a as usize], &lookup[b as usize]);
                let hamming: u32 = pa.iter().zip(pb).map(|(x, y)| (x ^ y).count_ones()).sum();
                wrap_negate(hamming as f64, negate)
            });
            (
                oracle,
                InstanceData::Bits {
                    words,
                    choices: Arc::new(choices),
                },
            )
        }
        InstanceKind::TreeLeaves => {
            if spec.dim > 63 {
                return Err(Error::BadInstance("tree depth is limited to 63".into()));
            }
            let depth = spec.dim as u32;
            let mask = (1u64 << depth) - 1;
            let paths: Vec<u64> = (0..n).map(|_| rng.random::<u64>() & mask).collect();
            let paths = Arc::new(paths);
            let lookup = Arc::clone(&paths);
            let oracle = DistanceOracle::new(move |a, b| {
                wrap_negate(
                    tree_leaf_distance(lookup[a as usize], lookup[b as usize], depth),
                    negate,
                )
            });
            (oracle, InstanceData::Leaves(paths))
        }
        InstanceKind::RandomMatrix => {
            let mut rows: Vec<Vec<f64>> = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..i {
                    let v = rng.random::<f64>();
                    rows[i][j] = v;
                    rows[j][i] = v;
                }
            }
            let rows = Arc::new(rows);
            let lookup = Arc::clone(&rows);
            let oracle =
                DistanceOracle::new(move |a, b| wrap_negate(lookup[a as usize][b as usize], negate));
            (oracle, InstanceData::Matrix(rows))
        }
        InstanceKind::PseudorandomPairs => {
            // No stored matrix: the distance is a strong mix of
            // (seed, lo, hi), so any id pair has a stable uniform value.
            let seed = spec.seed;
            let oracle = DistanceOracle::new(move |a, b| {
                let h = splitmix64(seed ^ splitmix64(a ^ splitmix64(b)));
                wrap_negate(unit_from_hash(h), negate)
            });
            (oracle, InstanceData::Hashed)
        }
    };
    Ok(Instance {
        spec,
        handles,
        oracle,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: InstanceKind, n: usize, dim: usize, metric: Metric, seed: u64) -> InstanceSpec {
        InstanceSpec {
            kind,
            n,
            dim,
            metric,
            negate: false,
            seed,
        }
    }

    fn h(i: u64) -> PointHandle {
        PointHandle::new(i)
    }

    #[test]
    fn uniform_l1_distance_is_coordinate_gap() {
        // Fixed test seed recorded here; the instance it forces is frozen
        // below so the l1 distance has an explicit witness.
        let inst = generate(spec(InstanceKind::UniformHypercube, 2, 1, Metric::L1, 7)).unwrap();
        let pts = inst.vectors().unwrap();
        let expect = (pts[0][0] - pts[1][0]).abs();
        let d = inst.oracle.raw(h(0), h(1)).unwrap().value();
        assert_eq!(d, expect);
        assert!(d > 0.0 && d < 1.0);
    }

    #[test]
    fn tree_distance_counts_paths_through_the_lca() {
        // Two leaves of a depth-5 tree sharing a 3-bit prefix: distance
        // 2 * (5 - 3) = 4. Paths 10110 and 10101 share exactly "101".
        assert_eq!(tree_leaf_distance(0b10110, 0b10101, 5), 4.0);
        assert_eq!(tree_leaf_distance(0b10110, 0b10110, 5), 0.0);
        assert_eq!(tree_leaf_distance(0b00000, 0b10000, 5), 10.0);
    }

    #[test]
    fn pseudorandom_pairs_are_symmetric() {
        let inst = generate(spec(InstanceKind::PseudorandomPairs, 0, 1, Metric::L2, 99)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let a = rng.random_range(0..10_000u64);
            let b = rng.random_range(0..10_000u64);
            if a == b {
                continue;
            }
            let d1 = inst.oracle.raw(h(a), h(b)).unwrap();
            let d2 = inst.oracle.raw(h(b), h(a)).unwrap();
            assert_eq!(d1, d2);
            let v = d1.value();
            assert!((0.0..1.0).contains(&v));
        }
    }

    #[test]
    fn replay_is_bitwise_identical() {
        for kind in [
            InstanceKind::UniformHypercube,
            InstanceKind::XorFractal,
            InstanceKind::TreeLeaves,
            InstanceKind::RandomMatrix,
            InstanceKind::PseudorandomPairs,
        ] {
            let s = spec(kind, 17, 33, Metric::L2, 12345);
            let a = generate(s).unwrap();
            let b = generate(s).unwrap();
            for i in 0..17u64 {
                for j in 0..i {
                    assert_eq!(
                        a.oracle.raw(h(i), h(j)).unwrap(),
                        b.oracle.raw(h(i), h(j)).unwrap(),
                        "{kind:?} replay diverged at ({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn negate_flips_every_distance() {
        let base = generate(spec(InstanceKind::RandomMatrix, 10, 1, Metric::L2, 3)).unwrap();
        let mut neg_spec = base.spec;
        neg_spec.negate = true;
        let neg = generate(neg_spec).unwrap();
        for i in 0..10u64 {
            for j in 0..i {
                let d = base.oracle.raw(h(i), h(j)).unwrap().value();
                let nd = neg.oracle.raw(h(i), h(j)).unwrap().value();
                assert_eq!(nd, -d);
            }
        }
    }

    #[test]
    fn dot_product_requires_uniform_hypercube() {
        let err = generate(spec(InstanceKind::TreeLeaves, 4, 5, Metric::DotProduct, 1))
            .err()
            .unwrap();
        assert!(matches!(err, Error::BadInstance(_)));
        assert!(generate(spec(
            InstanceKind::UniformHypercube,
            4,
            5,
            Metric::DotProduct,
            1
        ))
        .is_ok());
    }

    #[test]
    fn fractal_clusters_by_level_choice() {
        // Points sharing a level's generator subset are nearer on average
        // than points choosing differently, at every level (the hierarchy
        // the construction is meant to produce). Checked over 5 seeds.
        for seed in 0..5 {
            let inst = generate(spec(InstanceKind::XorFractal, 48, 93, Metric::L1, seed)).unwrap();
            let choices = inst.fractal_choices().unwrap();
            let levels = choices[0].len();
            assert_eq!(levels, 3);
            for level in 0..levels {
                let mut intra = (0.0, 0u64);
                let mut inter = (0.0, 0u64);
                for i in 0..48u64 {
                    for j in 0..i {
                        let d = inst.oracle.raw(h(i), h(j)).unwrap().value();
                        if choices[i as usize][level] == choices[j as usize][level] {
                            intra = (intra.0 + d, intra.1 + 1);
                        } else {
                            inter = (inter.0 + d, inter.1 + 1);
                        }
                    }
                }
                assert!(intra.1 > 0 && inter.1 > 0, "seed {seed} level {level} unsampled");
                let intra_mean = intra.0 / intra.1 as f64;
                let inter_mean = inter.0 / inter.1 as f64;
                assert!(
                    intra_mean < inter_mean,
                    "seed {seed} level {level}: intra {intra_mean} >= inter {inter_mean}"
                );
            }
        }
    }

    #[test]
    fn matrix_roundtrip_through_text_format() {
        let inst = generate(spec(InstanceKind::RandomMatrix, 8, 1, Metric::L2, 77)).unwrap();
        let mut buf = Vec::new();
        inst.write_matrix(&mut buf).unwrap();
        let loaded = Instance::read_matrix(&mut buf.as_slice()).unwrap();
        for i in 0..8u64 {
            for j in 0..i {
                assert_eq!(
                    inst.oracle.raw(h(i), h(j)).unwrap(),
                    loaded.oracle.raw(h(i), h(j)).unwrap()
                );
            }
        }
    }

    #[test]
    fn coords_csv_has_one_row_per_point() {
        let inst = generate(spec(InstanceKind::UniformHypercube, 5, 3, Metric::L2, 2)).unwrap();
        let mut buf = Vec::new();
        inst.write_coords_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert_eq!(text.lines().next().unwrap().split(',').count(), 3);
    }
}
