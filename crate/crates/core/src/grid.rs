//! Grid stimulus space, label structures, representations and alignment.
//!
//! Stimuli are identified by `id = y * n + x` in the canonical (identity)
//! placement. A [`Representation`] assigns every stimulus a lattice point;
//! two agents with different representations see the same stimulus at
//! different coordinates.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::stats;

/// How true categories are laid over the canonical grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Labeling {
    Columns,
    Rows,
    Quadrants,
}

impl Labeling {
    pub const ALL: [Labeling; 3] = [Labeling::Columns, Labeling::Rows, Labeling::Quadrants];

    pub fn as_str(self) -> &'static str {
        match self {
            Labeling::Columns => "columns",
            Labeling::Rows => "rows",
            Labeling::Quadrants => "quadrants",
        }
    }
}

impl fmt::Display for Labeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Labeling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "columns" | "cols" => Ok(Labeling::Columns),
            "rows" => Ok(Labeling::Rows),
            "quadrants" | "quad" => Ok(Labeling::Quadrants),
            other => Err(Error::Spec(format!("unknown labeling '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub labeling: Labeling,
}

impl GridSpec {
    pub fn new(n: usize, labeling: Labeling) -> Result<Self> {
        let spec = GridSpec { n, labeling };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Spec(format!("grid side must be at least 2, got {}", self.n)));
        }
        if self.n > u16::MAX as usize {
            return Err(Error::Spec(format!("grid side {} is too large", self.n)));
        }
        Ok(())
    }

    /// Number of categories.
    pub fn k(&self) -> usize {
        match self.labeling {
            Labeling::Columns | Labeling::Rows => self.n,
            Labeling::Quadrants => 4,
        }
    }

    pub fn num_stimuli(&self) -> usize {
        self.n * self.n
    }

    /// Split coordinate for quadrant labels; the low-index half is the larger one.
    pub fn quadrant_split(&self) -> usize {
        self.n.div_ceil(2)
    }
}

/// A bijective placement of stimuli onto the `n × n` lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawRepresentation")]
pub struct Representation {
    n: usize,
    placement: Vec<[u32; 2]>,
}

#[derive(Deserialize)]
struct RawRepresentation {
    n: usize,
    placement: Vec<[u32; 2]>,
}

impl TryFrom<RawRepresentation> for Representation {
    type Error = Error;

    fn try_from(raw: RawRepresentation) -> Result<Self> {
        Representation::from_placement(raw.n, raw.placement)
    }
}

impl Representation {
    /// The canonical placement: stimulus `id` sits at `(id % n, id / n)`.
    pub fn identity(n: usize) -> Self {
        let placement = (0..n * n).map(|id| [(id % n) as u32, (id / n) as u32]).collect();
        Representation { n, placement }
    }

    pub fn from_placement(n: usize, placement: Vec<[u32; 2]>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Spec(format!("grid side must be at least 2, got {n}")));
        }
        if placement.len() != n * n {
            return Err(Error::Dimension(format!(
                "placement has {} entries, expected {}",
                placement.len(),
                n * n
            )));
        }
        let mut seen = vec![false; n * n];
        for (id, &[x, y]) in placement.iter().enumerate() {
            let (x, y) = (x as usize, y as usize);
            if x >= n || y >= n {
                return Err(Error::Validation(format!(
                    "stimulus {id} placed at ({x}, {y}) outside the {n}x{n} grid"
                )));
            }
            let cell = y * n + x;
            if seen[cell] {
                return Err(Error::Validation(format!("lattice point ({x}, {y}) is used twice")));
            }
            seen[cell] = true;
        }
        Ok(Representation { n, placement })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.placement.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placement.is_empty()
    }

    pub fn coord(&self, id: usize) -> [u32; 2] {
        self.placement[id]
    }

    pub fn placement(&self) -> &[[u32; 2]] {
        &self.placement
    }

    /// Squared Euclidean distance between two stimuli in this representation.
    #[inline]
    pub fn dist2(&self, a: usize, b: usize) -> i64 {
        let [ax, ay] = self.placement[a];
        let [bx, by] = self.placement[b];
        let dx = ax as i64 - bx as i64;
        let dy = ay as i64 - by as i64;
        dx * dx + dy * dy
    }

    /// Ids of stimuli whose coordinates differ from `other`'s.
    pub fn displaced_from(&self, other: &Representation) -> Vec<usize> {
        (0..self.len())
            .filter(|&id| self.placement[id] != other.placement[id])
            .collect()
    }

    /// Applies an arbitrary coordinate map to every stimulus (used for isometry tests
    /// and axis flips). The map must be a bijection of the lattice.
    pub fn map_coords(&self, f: impl Fn([u32; 2]) -> [u32; 2]) -> Result<Representation> {
        Representation::from_placement(self.n, self.placement.iter().map(|&c| f(c)).collect())
    }
}

/// Ground-truth categories per stimulus id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct TrueLabels {
    labels: Vec<u32>,
    k: usize,
}

impl TryFrom<Vec<u32>> for TrueLabels {
    type Error = Error;

    fn try_from(labels: Vec<u32>) -> Result<Self> {
        let k = labels.iter().max().map_or(0, |&m| m as usize + 1);
        TrueLabels::new(labels, k)
    }
}

impl From<TrueLabels> for Vec<u32> {
    fn from(t: TrueLabels) -> Self {
        t.labels
    }
}

impl TrueLabels {
    /// Builds a label function over `k` categories; every category must be used.
    pub fn new(labels: Vec<u32>, k: usize) -> Result<Self> {
        if k == 0 || labels.is_empty() {
            return Err(Error::Validation("labels must be non-empty".into()));
        }
        let mut used = vec![false; k];
        for (id, &l) in labels.iter().enumerate() {
            if l as usize >= k {
                return Err(Error::Validation(format!(
                    "stimulus {id} has label {l}, expected < {k}"
                )));
            }
            used[l as usize] = true;
        }
        if let Some(missing) = used.iter().position(|u| !u) {
            return Err(Error::Validation(format!("category {missing} has no stimulus")));
        }
        Ok(TrueLabels { labels, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, id: usize) -> u32 {
        self.labels[id]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.labels
    }
}

/// Ground-truth labels for `spec`, attached to stimulus ids through the canonical placement.
pub fn true_labels(spec: &GridSpec) -> Result<TrueLabels> {
    spec.validate()?;
    let n = spec.n;
    let s = spec.quadrant_split();
    let labels = (0..n * n)
        .map(|id| {
            let (x, y) = (id % n, id / n);
            let l = match spec.labeling {
                Labeling::Columns => x,
                Labeling::Rows => y,
                Labeling::Quadrants => 2 * usize::from(y >= s) + usize::from(x >= s),
            };
            l as u32
        })
        .collect();
    TrueLabels::new(labels, spec.k())
}

/// Randomly swaps coordinates between pairs of stimuli.
///
/// Each stimulus is marked independently with probability `c`. The marked
/// stimuli are shuffled and consumed two at a time; each pair exchanges
/// coordinates. With an odd count, the last stimulus after the shuffle stays
/// put.
pub fn corrupt_representation<R: Rng + ?Sized>(base: &Representation, c: f64, rng: &mut R) -> Result<Representation> {
    check_unit("corruption level", c)?;
    let mut marked: Vec<usize> = (0..base.len()).filter(|_| rng.random::<f64>() < c).collect();
    marked.shuffle(rng);
    let mut placement = base.placement.clone();
    for pair in marked.chunks_exact(2) {
        placement.swap(pair[0], pair[1]);
    }
    Ok(Representation { n: base.n, placement })
}

/// Pairwise Euclidean distances over the upper triangle, in row-major id order (`i < j`).
pub fn pairwise_distances(rep: &Representation) -> Vec<f64> {
    let m = rep.len();
    let mut out = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in i + 1..m {
            out.push((rep.dist2(i, j) as f64).sqrt());
        }
    }
    out
}

/// Representational alignment: Pearson correlation of pairwise distance vectors.
pub fn alignment(a: &Representation, b: &Representation) -> Result<f64> {
    if a.n != b.n {
        return Err(Error::Dimension(format!(
            "representations over {}x{} and {}x{} grids",
            a.n, a.n, b.n, b.n
        )));
    }
    stats::pearson(&pairwise_distances(a), &pairwise_distances(b))
}

/// Mean-centred, normalised distance vector of one representation.
///
/// Alignment between two profiles is a single dot product, which makes
/// all-pairs alignment over large pools cheap.
#[derive(Debug, Clone)]
pub struct DistanceProfile {
    n: usize,
    unit: Vec<f64>,
}

impl DistanceProfile {
    pub fn new(rep: &Representation) -> Result<Self> {
        let d = pairwise_distances(rep);
        let m = stats::mean(&d);
        let mut unit: Vec<f64> = d.iter().map(|v| v - m).collect();
        let norm = unit.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Degenerate("all pairwise distances are equal".into()));
        }
        unit.iter_mut().for_each(|v| *v /= norm);
        Ok(DistanceProfile { n: rep.n, unit })
    }

    pub fn alignment(&self, other: &DistanceProfile) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "profiles over {}x{} and {}x{} grids",
                self.n, self.n, other.n, other.n
            )));
        }
        let dot: f64 = self.unit.iter().zip(&other.unit).map(|(a, b)| a * b).sum();
        Ok(dot.clamp(-1.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn at(n: usize, x: usize, y: usize) -> usize {
        y * n + x
    }

    #[test]
    fn column_and_quadrant_labels() {
        let cols = true_labels(&GridSpec::new(6, Labeling::Columns).unwrap()).unwrap();
        assert_eq!(cols.get(at(6, 3, 0)), 3);
        let quad = true_labels(&GridSpec::new(6, Labeling::Quadrants).unwrap()).unwrap();
        assert_eq!(quad.get(at(6, 1, 1)), 0);
        assert_eq!(quad.get(at(6, 4, 4)), 3);
        let rows = true_labels(&GridSpec::new(6, Labeling::Rows).unwrap()).unwrap();
        assert_eq!(rows.get(at(6, 3, 5)), 5);
    }

    #[test]
    fn seven_by_seven_quadrants_are_contiguous_blocks() {
        let spec = GridSpec::new(7, Labeling::Quadrants).unwrap();
        let labels = true_labels(&spec).unwrap();
        // enumerate each label's bounding box and check it is filled exactly
        for q in 0..4u32 {
            let cells: Vec<(usize, usize)> = (0..49)
                .filter(|&id| labels.get(id) == q)
                .map(|id| (id % 7, id / 7))
                .collect();
            assert!(!cells.is_empty());
            let xs = cells.iter().map(|c| c.0);
            let ys = cells.iter().map(|c| c.1);
            let (x0, x1) = (xs.clone().min().unwrap(), xs.max().unwrap());
            let (y0, y1) = (ys.clone().min().unwrap(), ys.max().unwrap());
            assert_eq!(cells.len(), (x1 - x0 + 1) * (y1 - y0 + 1));
        }
        let left: Vec<usize> = (0..7).filter(|&x| labels.get(at(7, x, 0)) == 0).collect();
        assert_eq!(left, vec![0, 1, 2, 3]);
        let right: Vec<usize> = (0..7).filter(|&x| labels.get(at(7, x, 0)) == 1).collect();
        assert_eq!(right, vec![4, 5, 6]);
    }

    #[test]
    fn tiny_grid_rejected() {
        assert!(matches!(GridSpec::new(1, Labeling::Columns), Err(Error::Spec(_))));
        let bad = GridSpec {
            n: 1,
            labeling: Labeling::Rows,
        };
        assert!(true_labels(&bad).is_err());
    }

    #[test]
    fn zero_corruption_is_identity() {
        let base = Representation::identity(6);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(corrupt_representation(&base, 0.0, &mut rng).unwrap(), base);
    }

    #[test]
    fn full_corruption_moves_every_stimulus_on_even_grid() {
        let base = Representation::identity(6);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let out = corrupt_representation(&base, 1.0, &mut rng).unwrap();
        // 36 marked, 18 swaps, each swap moves both members
        assert_eq!(out.displaced_from(&base).len(), 36);
        Representation::from_placement(6, out.placement().to_vec()).unwrap();
    }

    #[test]
    fn corruption_rejects_out_of_range() {
        let base = Representation::identity(3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            corrupt_representation(&base, 1.5, &mut rng),
            Err(Error::Range { .. })
        ));
        assert!(corrupt_representation(&base, -0.1, &mut rng).is_err());
    }

    #[test]
    fn half_corruption_marks_half_on_average() {
        // On the identity placement a swapped pair always moves both members, so the
        // displaced count is the marked count rounded down to even.
        let base = Representation::identity(6);
        let mut total = 0usize;
        for seed in 0..1000 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            total += corrupt_representation(&base, 0.5, &mut rng)
                .unwrap()
                .displaced_from(&base)
                .len();
        }
        // E[marked] = 18; E[displaced] = 18 - P(odd) = 17.5
        let mean = total as f64 / 1000.0;
        assert!((mean - 17.5).abs() < 1.0, "mean displaced {mean}");
    }

    #[test]
    fn self_alignment_is_one() {
        let r = Representation::identity(5);
        assert!((alignment(&r, &r).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_corner_swap_on_2x2_preserves_distances() {
        let base = Representation::identity(2);
        let mut p = base.placement().to_vec();
        p.swap(0, 3);
        let swapped = Representation::from_placement(2, p).unwrap();
        assert!((alignment(&base, &swapped).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn corner_swap_on_3x3_matches_brute_force() {
        // Value from an independent script: all 36 pairs enumerated by hand-rolled
        // loops over (x, y) tuples, numpy.corrcoef on the two distance lists.
        let base = Representation::identity(3);
        let mut p = base.placement().to_vec();
        p.swap(0, 8);
        let swapped = Representation::from_placement(3, p).unwrap();
        let got = alignment(&base, &swapped).unwrap();
        assert!((got - 0.480_619_623_526_495_57).abs() < 1e-12, "{got}");
    }

    #[test]
    fn mismatched_sizes_rejected() {
        let a = Representation::identity(3);
        let b = Representation::identity(4);
        assert!(matches!(alignment(&a, &b), Err(Error::Dimension(_))));
    }

    #[test]
    fn profile_route_agrees_with_direct_pearson() {
        let base = Representation::identity(6);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let other = corrupt_representation(&base, 0.4, &mut rng).unwrap();
        let direct = alignment(&base, &other).unwrap();
        let pa = DistanceProfile::new(&base).unwrap();
        let pb = DistanceProfile::new(&other).unwrap();
        assert!((pa.alignment(&pb).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn placement_must_be_bijective() {
        let mut p = Representation::identity(3).placement().to_vec();
        p[1] = p[0];
        assert!(Representation::from_placement(3, p).is_err());
        assert!(Representation::from_placement(3, vec![[0, 0]; 4]).is_err());
    }

    #[test]
    fn json_shapes() {
        let r = Representation::identity(2);
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"n":2,"placement":[[0,0],[1,0],[0,1],[1,1]]}"#);
        let bad = r#"{"n":2,"placement":[[0,0],[0,0],[0,1],[1,1]]}"#;
        assert!(serde_json::from_str::<Representation>(bad).is_err());
        let labels = true_labels(&GridSpec::new(2, Labeling::Columns).unwrap()).unwrap();
        assert_eq!(serde_json::to_string(&labels).unwrap(), "[0,1,0,1]");
    }
}
