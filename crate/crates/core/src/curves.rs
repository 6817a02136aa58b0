//! Bucketed utility curves: (alignment, teacher error) → expected accuracy.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{centroid_selection, sample_beliefs, score_1nn};
use crate::error::{check_unit, Error, Result};
use crate::grid::{corrupt_representation, true_labels, DistanceProfile, GridSpec, Labeling, Representation};
use crate::seeds::{rng_for, stream};
use crate::stats;

pub const BUCKET_WIDTH: f64 = 0.1;
const ALIGNMENT_BUCKETS: usize = 20;
const ERROR_BUCKETS: usize = 10;
// Guards bucket assignment against values such as 0.3 landing just below an edge.
const EDGE_SLACK: f64 = 1e-9;

pub const CSV_HEADER: &str = "alignment_lo,alignment_hi,error_lo,error_hi,mean_accuracy,count";

/// `0, 1/denominator, 2/denominator, ..., hi_numerator/denominator`.
pub fn steps(hi_numerator: u32, denominator: u32) -> Vec<f64> {
    (0..=hi_numerator).map(|i| i as f64 / denominator as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Dyadic,
    Classroom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub error_rates: Vec<f64>,
    pub corruption_levels: Vec<f64>,
    pub seeds_per_point: usize,
    pub label_structures: Vec<Labeling>,
    pub student_corruptions: Vec<f64>,
    pub master_seed: u64,
}

impl SweepConfig {
    /// Error 0.0..0.9 by 0.1, corruption 0.0..1.0 by 0.01, 10 seeds, columns + quadrants.
    pub fn dyadic_default(master_seed: u64) -> Self {
        SweepConfig {
            error_rates: steps(9, 10),
            corruption_levels: steps(100, 100),
            seeds_per_point: 10,
            label_structures: vec![Labeling::Columns, Labeling::Quadrants],
            student_corruptions: Vec::new(),
            master_seed,
        }
    }

    /// Error 0.0..0.9, teacher corruption 0.0..1.0 by 0.1, students 0.0..0.9, columns only.
    pub fn classroom_default(master_seed: u64) -> Self {
        SweepConfig {
            error_rates: steps(9, 10),
            corruption_levels: steps(10, 10),
            seeds_per_point: 10,
            label_structures: vec![Labeling::Columns],
            student_corruptions: steps(9, 10),
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for &e in &self.error_rates {
            check_unit("error rate", e)?;
        }
        for &c in self.corruption_levels.iter().chain(&self.student_corruptions) {
            check_unit("corruption level", c)?;
        }
        if self.seeds_per_point == 0 {
            return Err(Error::Config("seeds_per_point must be at least 1".into()));
        }
        if self.error_rates.is_empty() || self.corruption_levels.is_empty() {
            return Err(Error::Config("sweep needs error rates and corruption levels".into()));
        }
        if self.label_structures.is_empty() {
            return Err(Error::Config("sweep needs at least one label structure".into()));
        }
        Ok(())
    }

    pub fn dyadic_episodes(&self) -> usize {
        self.error_rates.len() * self.corruption_levels.len() * self.seeds_per_point * self.label_structures.len()
    }

    pub fn classroom_episodes(&self) -> usize {
        self.dyadic_episodes() * self.student_corruptions.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: CurveKind,
    pub grid_size: usize,
    pub label_structures: Vec<Labeling>,
    pub master_seed: u64,
    pub episodes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Cell {
    pub mean: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    alignment_edges: Vec<f64>,
    error_edges: Vec<f64>,
    cells: Vec<Cell>,
    pub provenance: Provenance,
}

/// One simulated teacher–student episode, before bucketing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Episode {
    pub structure: usize,
    pub alignment: f64,
    pub error_rate: f64,
    pub accuracy: f64,
}

fn edges(lo: f64, buckets: usize) -> Vec<f64> {
    (0..=buckets).map(|i| lo + i as f64 / 10.0).collect()
}

impl CurveTable {
    pub fn empty(provenance: Provenance) -> Self {
        CurveTable {
            alignment_edges: edges(-1.0, ALIGNMENT_BUCKETS),
            error_edges: edges(0.0, ERROR_BUCKETS),
            cells: vec![Cell::default(); ALIGNMENT_BUCKETS * ERROR_BUCKETS],
            provenance,
        }
    }

    /// Accumulates episodes in the given order. Sums run over the slice front
    /// to back, so the same slice always yields bit-identical means.
    pub fn from_episodes<'a>(provenance: Provenance, episodes: impl IntoIterator<Item = &'a Episode>) -> Self {
        let mut table = CurveTable::empty(provenance);
        let mut sums = vec![0.0f64; table.cells.len()];
        for ep in episodes {
            let i = table.cell_index(alignment_bucket(ep.alignment), error_bucket(ep.error_rate));
            sums[i] += ep.accuracy;
            table.cells[i].count += 1;
        }
        for (cell, sum) in table.cells.iter_mut().zip(sums) {
            if cell.count > 0 {
                cell.mean = sum / cell.count as f64;
            }
        }
        table
    }

    pub fn alignment_edges(&self) -> &[f64] {
        &self.alignment_edges
    }

    pub fn error_edges(&self) -> &[f64] {
        &self.error_edges
    }

    pub fn alignment_buckets(&self) -> usize {
        self.alignment_edges.len() - 1
    }

    pub fn error_buckets(&self) -> usize {
        self.error_edges.len() - 1
    }

    fn cell_index(&self, a: usize, e: usize) -> usize {
        a * self.error_buckets() + e
    }

    pub fn cell(&self, alignment_bucket: usize, error_bucket: usize) -> Cell {
        self.cells[self.cell_index(alignment_bucket, error_bucket)]
    }

    /// Mean accuracy of a populated bucket.
    pub fn mean(&self, alignment_bucket: usize, error_bucket: usize) -> Option<f64> {
        let c = self.cell(alignment_bucket, error_bucket);
        (c.count > 0).then_some(c.mean)
    }

    pub fn total_count(&self) -> u64 {
        self.cells.iter().map(|c| c.count).sum()
    }

    /// `(alignment bucket, error bucket, cell)` for every populated bucket.
    pub fn populated(&self) -> impl Iterator<Item = (usize, usize, Cell)> + '_ {
        let eb = self.error_buckets();
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.count > 0)
            .map(move |(i, c)| (i / eb, i % eb, *c))
    }

    /// Expected accuracy for a teacher at `error` whose alignment with the student is `alignment`.
    ///
    /// Unpopulated buckets fall back to the nearest populated bucket in index
    /// space; ties prefer the lower error index, then the higher alignment index.
    pub fn lookup(&self, alignment: f64, error: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&alignment) {
            return Err(Error::Range {
                what: "alignment",
                value: alignment,
                lo: -1.0,
                hi: 1.0,
            });
        }
        check_unit("error rate", error)?;
        let (a, e) = (alignment_bucket(alignment), error_bucket(error));
        if let Some(m) = self.mean(a, e) {
            return Ok(m);
        }
        self.populated()
            .min_by_key(|&(pa, pe, _)| {
                let da = pa as i64 - a as i64;
                let de = pe as i64 - e as i64;
                (da * da + de * de, pe, std::cmp::Reverse(pa))
            })
            .map(|(_, _, c)| c.mean)
            .ok_or(Error::EmptyCurve)
    }

    /// Copy with every mean negated (rank-reversal fixture).
    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        out.cells.iter_mut().for_each(|c| c.mean = -c.mean);
        out
    }

    /// Sets one bucket directly. Intended for hand-built tables.
    pub fn set_cell(&mut self, alignment_bucket: usize, error_bucket: usize, cell: Cell) {
        let i = self.cell_index(alignment_bucket, error_bucket);
        self.cells[i] = cell;
    }

    /// CSV of populated buckets; means carry 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for (a, e, c) in self.populated() {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.16e},{}",
                self.alignment_edges[a],
                self.alignment_edges[a + 1],
                self.error_edges[e],
                self.error_edges[e + 1],
                c.mean,
                c.count
            );
        }
        out
    }

    pub fn from_csv(csv: &str, provenance: Provenance) -> Result<Self> {
        let mut lines = csv.lines();
        match lines.next() {
            Some(h) if h.trim() == CSV_HEADER => {}
            other => {
                return Err(Error::Parse(format!(
                    "expected curve header '{CSV_HEADER}', found {other:?}"
                )))
            }
        }
        let mut table = CurveTable::empty(provenance);
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(Error::Parse(format!("line {}: expected 6 fields", lineno + 2)));
            }
            let num = |i: usize| -> Result<f64> {
                fields[i]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))
            };
            let a_lo = num(0)?;
            let e_lo = num(2)?;
            let mean = num(4)?;
            let count: u64 = fields[5]
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?;
            let a = table
                .alignment_edges
                .iter()
                .position(|&x| x == a_lo)
                .filter(|&i| i < ALIGNMENT_BUCKETS)
                .ok_or_else(|| Error::Parse(format!("line {}: unknown alignment edge {a_lo}", lineno + 2)))?;
            let e = table
                .error_edges
                .iter()
                .position(|&x| x == e_lo)
                .filter(|&i| i < ERROR_BUCKETS)
                .ok_or_else(|| Error::Parse(format!("line {}: unknown error edge {e_lo}", lineno + 2)))?;
            table.set_cell(a, e, Cell { mean, count });
        }
        Ok(table)
    }
}

pub fn alignment_bucket(alignment: f64) -> usize {
    let i = ((alignment + 1.0) / BUCKET_WIDTH + EDGE_SLACK).floor();
    (i.max(0.0) as usize).min(ALIGNMENT_BUCKETS - 1)
}

pub fn error_bucket(error: f64) -> usize {
    let i = (error / BUCKET_WIDTH + EDGE_SLACK).floor();
    (i.max(0.0) as usize).min(ERROR_BUCKETS - 1)
}

/// Pooled curve plus one table per label structure.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveBuild {
    pub pooled: CurveTable,
    pub per_structure: Vec<(Labeling, CurveTable)>,
}

fn assemble(kind: CurveKind, spec: &GridSpec, cfg: &SweepConfig, episodes: &[Episode]) -> CurveBuild {
    let prov = |structures: Vec<Labeling>, count: usize| Provenance {
        kind,
        grid_size: spec.n,
        label_structures: structures,
        master_seed: cfg.master_seed,
        episodes: count as u64,
    };
    let pooled = CurveTable::from_episodes(prov(cfg.label_structures.clone(), episodes.len()), episodes);
    let per_structure = cfg
        .label_structures
        .iter()
        .enumerate()
        .map(|(si, &l)| {
            let eps: Vec<&Episode> = episodes.iter().filter(|e| e.structure == si).collect();
            (l, CurveTable::from_episodes(prov(vec![l], eps.len()), eps))
        })
        .collect();
    CurveBuild { pooled, per_structure }
}

/// Simulates the dyadic sweep and returns its raw episodes in index order.
pub fn dyadic_episodes(spec: &GridSpec, cfg: &SweepConfig) -> Result<Vec<Episode>> {
    spec.validate()?;
    cfg.validate()?;
    if !cfg.student_corruptions.is_empty() {
        return Err(Error::Config(
            "the dyadic curve uses the identity student; student_corruptions must be empty".into(),
        ));
    }
    let student = Representation::identity(spec.n);
    let student_profile = DistanceProfile::new(&student)?;
    let truths = cfg
        .label_structures
        .iter()
        .map(|&l| true_labels(&GridSpec { n: spec.n, labeling: l }))
        .collect::<Result<Vec<_>>>()?;
    let (ne, nc, ns) = (cfg.error_rates.len(), cfg.corruption_levels.len(), cfg.seeds_per_point);
    (0..cfg.dyadic_episodes())
        .into_par_iter()
        .map(|idx| {
            let seed = idx % ns;
            let ci = (idx / ns) % nc;
            let ei = (idx / (ns * nc)) % ne;
            let si = idx / (ns * nc * ne);
            let mut rng = rng_for(
                cfg.master_seed,
                &[stream::DYADIC_CURVE, si as u64, ei as u64, ci as u64, seed as u64],
            );
            let error_rate = cfg.error_rates[ei];
            let teacher = corrupt_representation(&student, cfg.corruption_levels[ci], &mut rng)?;
            let alignment = student_profile.alignment(&DistanceProfile::new(&teacher)?)?;
            let beliefs = sample_beliefs(&truths[si], error_rate, &mut rng)?;
            let sel = centroid_selection(&teacher, &beliefs)?;
            Ok(Episode {
                structure: si,
                alignment,
                error_rate,
                accuracy: score_1nn(&student, &sel.set.items, truths[si].as_slice()),
            })
        })
        .collect()
}

/// Dyadic utility curve: corrupted teachers, one identity-representation student.
pub fn build_dyadic_curve(spec: &GridSpec, cfg: &SweepConfig) -> Result<CurveBuild> {
    let episodes = dyadic_episodes(spec, cfg)?;
    Ok(assemble(CurveKind::Dyadic, spec, cfg, &episodes))
}

/// Simulates the classroom sweep: each teacher parameterisation teaches a set
/// of students at every configured student corruption level.
pub fn classroom_episodes(spec: &GridSpec, cfg: &SweepConfig) -> Result<Vec<Episode>> {
    spec.validate()?;
    cfg.validate()?;
    if cfg.student_corruptions.is_empty() {
        return Err(Error::Config("classroom curve needs student_corruptions".into()));
    }
    let canonical = Representation::identity(spec.n);
    let truths = cfg
        .label_structures
        .iter()
        .map(|&l| true_labels(&GridSpec { n: spec.n, labeling: l }))
        .collect::<Result<Vec<_>>>()?;
    let (ne, nc, ns) = (cfg.error_rates.len(), cfg.corruption_levels.len(), cfg.seeds_per_point);
    let groups = cfg.dyadic_episodes();
    let nested: Vec<Vec<Episode>> = (0..groups)
        .into_par_iter()
        .map(|idx| {
            let seed = idx % ns;
            let ci = (idx / ns) % nc;
            let ei = (idx / (ns * nc)) % ne;
            let si = idx / (ns * nc * ne);
            let path = [stream::CLASSROOM_CURVE, si as u64, ei as u64, ci as u64, seed as u64];
            let mut rng = rng_for(cfg.master_seed, &path);
            let error_rate = cfg.error_rates[ei];
            let teacher = corrupt_representation(&canonical, cfg.corruption_levels[ci], &mut rng)?;
            let teacher_profile = DistanceProfile::new(&teacher)?;
            let beliefs = sample_beliefs(&truths[si], error_rate, &mut rng)?;
            let sel = centroid_selection(&teacher, &beliefs)?;
            cfg.student_corruptions
                .iter()
                .map(|&sc| {
                    let student = corrupt_representation(&canonical, sc, &mut rng)?;
                    Ok(Episode {
                        structure: si,
                        alignment: teacher_profile.alignment(&DistanceProfile::new(&student)?)?,
                        error_rate,
                        accuracy: score_1nn(&student, &sel.set.items, truths[si].as_slice()),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// Classroom utility curve (students are corrupted too).
pub fn build_classroom_curve(spec: &GridSpec, cfg: &SweepConfig) -> Result<CurveBuild> {
    let episodes = classroom_episodes(spec, cfg)?;
    Ok(assemble(CurveKind::Classroom, spec, cfg, &episodes))
}

/// Spearman correlation of bucket means over buckets populated in both curves.
pub fn structure_rank_correlation(a: &CurveTable, b: &CurveTable) -> Result<f64> {
    if a.alignment_edges != b.alignment_edges || a.error_edges != b.error_edges {
        return Err(Error::Dimension("curves do not share bucket edges".into()));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = a
        .populated()
        .filter_map(|(ai, ei, c)| b.mean(ai, ei).map(|m| (c.mean, m)))
        .unzip();
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} shared populated buckets, need at least 3",
            xs.len()
        )));
    }
    stats::spearman(&xs, &ys)
}

/// Spearman correlation between alignment bucket index and mean accuracy
/// within one error bucket; `None` if fewer than 3 alignment buckets are
/// populated or the means are constant.
pub fn alignment_trend(curve: &CurveTable, error_bucket: usize) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = (0..curve.alignment_buckets())
        .filter_map(|a| curve.mean(a, error_bucket).map(|m| (a as f64, m)))
        .unzip();
    if xs.len() < 3 {
        return None;
    }
    stats::spearman(&xs, &ys).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov() -> Provenance {
        Provenance {
            kind: CurveKind::Dyadic,
            grid_size: 6,
            label_structures: vec![Labeling::Columns],
            master_seed: 0,
            episodes: 0,
        }
    }

    #[test]
    fn bucket_edges_are_stable() {
        assert_eq!(error_bucket(0.0), 0);
        assert_eq!(error_bucket(0.3), 3);
        assert_eq!(error_bucket(0.7), 7);
        assert_eq!(error_bucket(0.9), 9);
        assert_eq!(error_bucket(1.0), 9);
        assert_eq!(alignment_bucket(1.0), 19);
        assert_eq!(alignment_bucket(-1.0), 0);
        assert_eq!(alignment_bucket(0.0), 10);
        assert_eq!(alignment_bucket(0.95), 19);
        assert_eq!(alignment_bucket(-0.05), 9);
    }

    #[test]
    fn direct_hit_returns_stored_mean() {
        let mut t = CurveTable::empty(prov());
        t.set_cell(15, 2, Cell { mean: 0.625, count: 3 });
        assert_eq!(t.lookup(0.55, 0.25).unwrap(), 0.625);
    }

    #[test]
    fn unpopulated_lookup_falls_back_to_nearest() {
        let mut t = CurveTable::empty(prov());
        t.set_cell(19, 0, Cell { mean: 0.9, count: 1 });
        t.set_cell(0, 9, Cell { mean: 0.1, count: 1 });
        assert_eq!(t.lookup(0.9, 0.2).unwrap(), 0.9);
        assert_eq!(t.lookup(-0.95, 0.7).unwrap(), 0.1);
    }

    #[test]
    fn fallback_ties_prefer_lower_error_then_higher_alignment() {
        let mut t = CurveTable::empty(prov());
        // both at distance 1 from (10, 5)
        t.set_cell(10, 4, Cell { mean: 0.4, count: 1 });
        t.set_cell(10, 6, Cell { mean: 0.6, count: 1 });
        assert_eq!(t.lookup(0.05, 0.55).unwrap(), 0.4);
        let mut t = CurveTable::empty(prov());
        t.set_cell(9, 5, Cell { mean: 0.2, count: 1 });
        t.set_cell(11, 5, Cell { mean: 0.3, count: 1 });
        assert_eq!(t.lookup(0.05, 0.55).unwrap(), 0.3);
    }

    #[test]
    fn lookup_errors() {
        let t = CurveTable::empty(prov());
        assert!(matches!(t.lookup(0.5, 0.1), Err(Error::EmptyCurve)));
        assert!(matches!(t.lookup(1.5, 0.1), Err(Error::Range { .. })));
        assert!(matches!(t.lookup(0.5, -0.1), Err(Error::Range { .. })));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let mut t = CurveTable::empty(prov());
        t.set_cell(
            3,
            1,
            Cell {
                mean: 1.0 / 3.0,
                count: 7,
            },
        );
        t.set_cell(
            19,
            0,
            Cell {
                mean: 0.1 + 0.2,
                count: 1,
            },
        );
        let back = CurveTable::from_csv(&t.to_csv(), prov()).unwrap();
        assert_eq!(back, t);
        assert!(t.to_csv().starts_with(CSV_HEADER));
    }

    #[test]
    fn rank_correlation_needs_three_buckets() {
        let mut t = CurveTable::empty(prov());
        t.set_cell(1, 1, Cell { mean: 0.1, count: 1 });
        t.set_cell(2, 1, Cell { mean: 0.2, count: 1 });
        assert!(matches!(
            structure_rank_correlation(&t, &t),
            Err(Error::InsufficientData(_))
        ));
        t.set_cell(3, 1, Cell { mean: 0.3, count: 1 });
        assert!((structure_rank_correlation(&t, &t).unwrap() - 1.0).abs() < 1e-12);
        assert!((structure_rank_correlation(&t, &t.negated()).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn episode_counts_for_defaults() {
        assert_eq!(SweepConfig::dyadic_default(0).dyadic_episodes(), 20_200);
        assert_eq!(SweepConfig::classroom_default(0).classroom_episodes(), 11_000);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SweepConfig::dyadic_default(0);
        cfg.seeds_per_point = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = SweepConfig::dyadic_default(0);
        cfg.error_rates.push(1.2);
        assert!(matches!(cfg.validate(), Err(Error::Range { .. })));
        let spec = GridSpec::new(6, Labeling::Columns).unwrap();
        assert!(build_dyadic_curve(&spec, &SweepConfig::classroom_default(0)).is_err());
        assert!(build_classroom_curve(&spec, &SweepConfig::dyadic_default(0)).is_err());
    }
}
