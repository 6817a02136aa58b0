//! Human-study bridge: condition export, response ingestion, post-hoc teacher
//! error and the alignment–accuracy regression.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{centroid_selection, classify_1nn, flip_labels, BeliefLabels, TeachingSet};
use crate::error::{check_unit, Error, Result};
use crate::grid::{alignment, corrupt_representation, true_labels, GridSpec, Labeling, Representation, TrueLabels};
use crate::seeds::{rng_for, stream};
use crate::stats;

pub const FORMAT_VERSION: u32 = 1;
pub const GLYPH_FEATURES: usize = 9;
pub const CONFIDENCE_RANGE: (u8, u8) = (1, 7);
/// Accepted distance between a sampled teacher's alignment and its target level.
pub const LEVEL_TOLERANCE: f64 = 0.05;
pub const MAX_LEVEL_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StimulusKind {
    SimpleFeatures,
    SalientDinos,
}

impl StimulusKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StimulusKind::SimpleFeatures => "simple_features",
            StimulusKind::SalientDinos => "salient_dinos",
        }
    }

    /// Grid side used by the human task for this stimulus set.
    pub fn default_grid_size(self) -> usize {
        match self {
            StimulusKind::SimpleFeatures => 6,
            StimulusKind::SalientDinos => 7,
        }
    }
}

impl fmt::Display for StimulusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One teacher condition shown to participants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionFile {
    pub format_version: u32,
    pub condition_id: String,
    pub spec: GridSpec,
    pub stimulus_kind: StimulusKind,
    pub category_names: Vec<String>,
    pub revealed: TeachingSet,
    pub target_alignment: f64,
    pub teacher_alignment: f64,
    pub teacher_representation: Representation,
    /// Nine feature values per stimulus id; present only for dino stimuli.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glyphs: Option<Vec<[f64; GLYPH_FEATURES]>>,
}

impl ConditionFile {
    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Validation(format!(
                "condition {}: format_version {} (expected {FORMAT_VERSION})",
                self.condition_id, self.format_version
            )));
        }
        self.spec.validate()?;
        let k = self.spec.k();
        let m = self.spec.num_stimuli();
        if self.category_names.len() != k {
            return Err(Error::Validation(format!(
                "condition {}: {} category names for {k} categories",
                self.condition_id,
                self.category_names.len()
            )));
        }
        if self.revealed.is_empty() {
            return Err(Error::Validation(format!(
                "condition {}: nothing revealed",
                self.condition_id
            )));
        }
        for it in &self.revealed.items {
            if it.stimulus >= m || it.label as usize >= k {
                return Err(Error::Validation(format!(
                    "condition {}: revealed item {:?} out of range",
                    self.condition_id, it
                )));
            }
        }
        if self.teacher_representation.n() != self.spec.n {
            return Err(Error::Validation(format!(
                "condition {}: teacher representation grid size differs",
                self.condition_id
            )));
        }
        match (&self.glyphs, self.stimulus_kind) {
            (Some(g), StimulusKind::SalientDinos) if g.len() == m => Ok(()),
            (None, StimulusKind::SimpleFeatures) => Ok(()),
            _ => Err(Error::Validation(format!(
                "condition {}: glyph features must be present for exactly the dino stimuli",
                self.condition_id
            ))),
        }
    }

    pub fn true_labels(&self) -> Result<TrueLabels> {
        true_labels(&self.spec)
    }

    /// Unrevealed stimulus ids, ascending.
    pub fn unrevealed(&self) -> Vec<usize> {
        (0..self.spec.num_stimuli())
            .filter(|&id| !self.revealed.reveals(id))
            .collect()
    }
}

pub fn category_names(k: usize) -> Vec<String> {
    (0..k).map(|i| ((b'A' + i as u8) as char).to_string()).collect()
}

/// Deterministic stand-in for the dino feature vectors: the first two
/// features track the canonical x and y; the remaining seven are mid-range.
pub fn glyph_features(n: usize) -> Vec<[f64; GLYPH_FEATURES]> {
    let scale = (n - 1) as f64;
    (0..n * n)
        .map(|id| {
            let mut f = [0.5; GLYPH_FEATURES];
            f[0] = (id % n) as f64 / scale;
            f[1] = (id / n) as f64 / scale;
            f
        })
        .collect()
}

/// Target alignments for `levels` conditions, evenly spaced from 1 down to 0.
pub fn level_targets(levels: usize) -> Vec<f64> {
    if levels == 1 {
        return vec![1.0];
    }
    (0..levels)
        .map(|i| (levels - 1 - i) as f64 / (levels - 1) as f64)
        .collect()
}

fn sample_teacher_at<R: Rng + ?Sized>(
    canonical: &Representation,
    target: f64,
    rng: &mut R,
) -> Result<(Representation, f64)> {
    for attempt in 0..MAX_LEVEL_ATTEMPTS {
        // first try the corruption that usually lands near the target
        let c = if attempt == 0 {
            (1.0 - target).clamp(0.0, 1.0)
        } else {
            rng.random::<f64>()
        };
        let rep = corrupt_representation(canonical, c, rng)?;
        let a = alignment(canonical, &rep)?;
        if (a - target).abs() <= LEVEL_TOLERANCE {
            return Ok((rep, a));
        }
    }
    Err(Error::Sampling {
        level: target,
        attempts: MAX_LEVEL_ATTEMPTS,
    })
}

/// One condition per (stimulus kind, label structure, alignment level), each
/// taught by a zero-error self-centred teacher sampled near the level.
pub fn export_conditions<R: Rng + ?Sized>(
    kinds: &[(StimulusKind, usize)],
    structures: &[Labeling],
    levels: usize,
    rng: &mut R,
) -> Result<Vec<ConditionFile>> {
    if levels == 0 {
        return Err(Error::Config("need at least one alignment level".into()));
    }
    let mut out = Vec::new();
    for &(kind, n) in kinds {
        let canonical = Representation::identity(n);
        for &labeling in structures {
            let spec = GridSpec::new(n, labeling)?;
            let truth = true_labels(&spec)?;
            let beliefs = BeliefLabels::exact(&truth);
            for (li, target) in level_targets(levels).into_iter().enumerate() {
                let (teacher, teacher_alignment) = sample_teacher_at(&canonical, target, rng)?;
                let revealed = centroid_selection(&teacher, &beliefs)?.set;
                out.push(ConditionFile {
                    format_version: FORMAT_VERSION,
                    condition_id: format!("{kind}-{n}x{n}-{labeling}-level{li}"),
                    spec,
                    stimulus_kind: kind,
                    category_names: category_names(spec.k()),
                    revealed,
                    target_alignment: target,
                    teacher_alignment,
                    teacher_representation: teacher,
                    glyphs: (kind == StimulusKind::SalientDinos).then(|| glyph_features(n)),
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseItem {
    pub stimulus: usize,
    pub category: u32,
}

/// One participant's answers for one condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseFile {
    pub format_version: u32,
    pub condition_id: String,
    pub participant_id: String,
    pub responses: Vec<ResponseItem>,
    pub confidence: u8,
    pub started_at_ms: u64,
    pub submitted_at_ms: u64,
}

/// Why a response file was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum RejectReason {
    #[error("unreadable response file: {message}")]
    Unreadable { message: String },
    #[error("unsupported format_version {found}")]
    FormatVersion { found: u32 },
    #[error("unknown condition id '{condition_id}'")]
    UnknownCondition { condition_id: String },
    #[error(
        "coverage mismatch: {missing} unrevealed stimuli unanswered, {unexpected} unexpected or duplicate answers"
    )]
    Coverage { missing: usize, unexpected: usize },
    #[error("stimulus {stimulus} answered with invalid category {category}")]
    InvalidCategory { stimulus: usize, category: u32 },
    #[error("confidence {value} outside 1..=7")]
    Confidence { value: u8 },
}

/// Checks a response against its condition.
pub fn validate_response(cond: &ConditionFile, resp: &ResponseFile) -> std::result::Result<(), RejectReason> {
    if resp.format_version != FORMAT_VERSION {
        return Err(RejectReason::FormatVersion {
            found: resp.format_version,
        });
    }
    if resp.condition_id != cond.condition_id {
        return Err(RejectReason::UnknownCondition {
            condition_id: resp.condition_id.clone(),
        });
    }
    let k = cond.spec.k() as u32;
    if let Some(bad) = resp.responses.iter().find(|r| r.category >= k) {
        return Err(RejectReason::InvalidCategory {
            stimulus: bad.stimulus,
            category: bad.category,
        });
    }
    let expected: HashSet<usize> = cond.unrevealed().into_iter().collect();
    let mut seen = HashSet::new();
    let mut unexpected = 0;
    for r in &resp.responses {
        if !expected.contains(&r.stimulus) || !seen.insert(r.stimulus) {
            unexpected += 1;
        }
    }
    let missing = expected.len() - seen.len();
    if missing > 0 || unexpected > 0 {
        return Err(RejectReason::Coverage { missing, unexpected });
    }
    let (lo, hi) = CONFIDENCE_RANGE;
    if !(lo..=hi).contains(&resp.confidence) {
        return Err(RejectReason::Confidence { value: resp.confidence });
    }
    Ok(())
}

fn accuracy_against(resp: &ResponseFile, labels: &[u32]) -> f64 {
    let correct = resp
        .responses
        .iter()
        .filter(|r| labels[r.stimulus] == r.category)
        .count();
    correct as f64 / resp.responses.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantResult {
    pub source: String,
    pub condition_id: String,
    pub participant_id: String,
    pub accuracy: f64,
    pub confidence: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition_id: String,
    pub stimulus_kind: StimulusKind,
    pub labeling: Labeling,
    pub teacher_alignment: f64,
    pub participants: usize,
    pub mean_accuracy: f64,
    pub stderr: f64,
    pub mean_confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IngestReport {
    pub participants: Vec<ParticipantResult>,
    pub conditions: Vec<ConditionSummary>,
    pub rejected: Vec<(String, RejectReason)>,
}

/// Validates and scores response files; invalid files are rejected individually.
///
/// `responses` pairs a source name (e.g. a file name) with either a parsed
/// file or the reason it could not be read.
pub fn ingest_responses(
    conditions: &[ConditionFile],
    responses: Vec<(String, std::result::Result<ResponseFile, RejectReason>)>,
) -> Result<IngestReport> {
    let by_id: BTreeMap<&str, &ConditionFile> = conditions.iter().map(|c| (c.condition_id.as_str(), c)).collect();
    let mut truths = BTreeMap::new();
    let mut report = IngestReport::default();
    for (source, parsed) in responses {
        let resp = match parsed {
            Ok(r) => r,
            Err(reason) => {
                report.rejected.push((source, reason));
                continue;
            }
        };
        let Some(cond) = by_id.get(resp.condition_id.as_str()) else {
            report.rejected.push((
                source,
                RejectReason::UnknownCondition {
                    condition_id: resp.condition_id.clone(),
                },
            ));
            continue;
        };
        if let Err(reason) = validate_response(cond, &resp) {
            report.rejected.push((source, reason));
            continue;
        }
        if !truths.contains_key(&cond.condition_id) {
            truths.insert(cond.condition_id.clone(), cond.true_labels()?);
        }
        let truth = &truths[&cond.condition_id];
        report.participants.push(ParticipantResult {
            source,
            condition_id: resp.condition_id.clone(),
            participant_id: resp.participant_id.clone(),
            accuracy: accuracy_against(&resp, truth.as_slice()),
            confidence: resp.confidence,
        });
    }
    for cond in conditions {
        let rows: Vec<&ParticipantResult> = report
            .participants
            .iter()
            .filter(|p| p.condition_id == cond.condition_id)
            .collect();
        if rows.is_empty() {
            continue;
        }
        let accs: Vec<f64> = rows.iter().map(|p| p.accuracy).collect();
        let confs: Vec<f64> = rows.iter().map(|p| p.confidence as f64).collect();
        report.conditions.push(ConditionSummary {
            condition_id: cond.condition_id.clone(),
            stimulus_kind: cond.stimulus_kind,
            labeling: cond.spec.labeling,
            teacher_alignment: cond.teacher_alignment,
            participants: rows.len(),
            mean_accuracy: stats::mean(&accs),
            stderr: stats::std_error(&accs),
            mean_confidence: stats::mean(&confs),
        });
    }
    Ok(report)
}

/// A 1-NN "participant" that sees the grid in canonical coordinates.
pub fn simulate_1nn_participant(cond: &ConditionFile, participant_id: &str) -> Result<ResponseFile> {
    let preds = classify_1nn(&Representation::identity(cond.spec.n), &cond.revealed)?;
    Ok(ResponseFile {
        format_version: FORMAT_VERSION,
        condition_id: cond.condition_id.clone(),
        participant_id: participant_id.to_string(),
        responses: preds
            .iter()
            .map(|(stimulus, category)| ResponseItem { stimulus, category })
            .collect(),
        confidence: 4,
        started_at_ms: 0,
        submitted_at_ms: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosthocPoint {
    pub epsilon: f64,
    pub mean_accuracy: f64,
    /// Monte Carlo standard error over seeds.
    pub stderr: f64,
}

/// Rescores answers against truth labels that were flipped with probability
/// `epsilon` (to a uniform different label), averaged over `seeds` corruptions.
pub fn posthoc_error(
    answers: &[ResponseItem],
    truth: &TrueLabels,
    epsilons: &[f64],
    seeds: usize,
    seed: u64,
) -> Result<Vec<PosthocPoint>> {
    if seeds == 0 {
        return Err(Error::Config("posthoc analysis needs at least one seed".into()));
    }
    if answers.is_empty() {
        return Err(Error::Precondition("no answers to rescore".into()));
    }
    if let Some(bad) = answers.iter().find(|a| a.stimulus >= truth.len()) {
        return Err(Error::Dimension(format!(
            "answer for unknown stimulus {}",
            bad.stimulus
        )));
    }
    epsilons
        .iter()
        .enumerate()
        .map(|(ei, &eps)| {
            check_unit("error rate", eps)?;
            let accs = (0..seeds)
                .map(|s| {
                    let mut rng = rng_for(seed, &[stream::STUDY, ei as u64, s as u64]);
                    let flipped = flip_labels(truth.as_slice(), truth.k(), eps, &mut rng)?;
                    let hits = answers.iter().filter(|a| flipped[a.stimulus] == a.category).count();
                    Ok(hits as f64 / answers.len() as f64)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(PosthocPoint {
                epsilon: eps,
                mean_accuracy: stats::mean(&accs),
                stderr: stats::std_error(&accs),
            })
        })
        .collect()
}

/// Expected rescored accuracy for a participant of accuracy `a` with `k` categories.
pub fn posthoc_expected(a: f64, epsilon: f64, k: usize) -> f64 {
    a * (1.0 - epsilon) + (1.0 - a) * epsilon / (k as f64 - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub r: f64,
    pub p_value: f64,
    pub permutations: usize,
    pub n: usize,
}

fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let mx = stats::mean(xs);
    let my = stats::mean(ys);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Least-squares fit of accuracy on alignment with a two-sided permutation
/// p-value for Pearson's r (`(hits + 1) / (permutations + 1)`).
pub fn regress_alignment_accuracy<R: Rng + ?Sized>(
    points: &[(f64, f64)],
    permutations: usize,
    rng: &mut R,
) -> Result<Regression> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "regression needs at least 3 points, got {}",
            points.len()
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    let mx = stats::mean(&xs);
    if xs.iter().all(|&x| x == mx) {
        return Err(Error::Degenerate("all alignments are equal".into()));
    }
    let (slope, intercept) = ols(&xs, &ys);
    let r = match stats::pearson(&xs, &ys) {
        Ok(r) => r,
        // constant accuracies: flat line, no association
        Err(Error::Degenerate(_)) => 0.0,
        Err(e) => return Err(e),
    };
    let mut shuffled = ys.clone();
    let mut hits = 0usize;
    for _ in 0..permutations {
        shuffled.shuffle(rng);
        let rp = stats::pearson(&xs, &shuffled).unwrap_or(0.0);
        if rp.abs() >= r.abs() - 1e-12 {
            hits += 1;
        }
    }
    Ok(Regression {
        slope,
        intercept,
        r,
        p_value: (hits + 1) as f64 / (permutations + 1) as f64,
        permutations,
        n: points.len(),
    })
}
