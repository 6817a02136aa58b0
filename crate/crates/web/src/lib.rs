//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each operation has a plain Rust function returning JSON (tested natively)
//! and a thin `#[wasm_bindgen]` wrapper for the page.

use repteach::agents::{classify_1nn, sample_beliefs, select_self_centered, TeacherConfig, TeacherKind};
use repteach::curves::{build_dyadic_curve, steps, SweepConfig};
use repteach::grid::{alignment, corrupt_representation, true_labels, GridSpec, Labeling, Representation};
use repteach::seeds::rng_for;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest grid the page offers; keeps the curve sweep interactive.
pub const MAX_GRID: usize = 10;

#[derive(Serialize)]
pub struct AlignmentView {
    pub n: usize,
    pub placement: Vec<[u32; 2]>,
    pub displaced: Vec<usize>,
    pub alignment: f64,
}

#[derive(Serialize)]
pub struct EpisodeView {
    pub n: usize,
    pub k: usize,
    pub teacher_placement: Vec<[u32; 2]>,
    pub alignment: f64,
    pub truth: Vec<u32>,
    pub beliefs: Vec<u32>,
    pub revealed: Vec<(usize, u32)>,
    /// Student prediction per stimulus id (`null` for revealed stimuli).
    pub predictions: Vec<Option<u32>>,
    pub accuracy: f64,
}

#[derive(Serialize)]
pub struct CurveCell {
    pub alignment_lo: f64,
    pub error_lo: f64,
    pub mean: f64,
    pub count: u64,
}

#[derive(Serialize)]
pub struct CurveView {
    pub episodes: u64,
    pub alignment_edges: Vec<f64>,
    pub error_edges: Vec<f64>,
    pub cells: Vec<CurveCell>,
}

fn spec(n: usize, labeling: &str) -> Result<GridSpec, String> {
    if n > MAX_GRID {
        return Err(format!("grid size is limited to {MAX_GRID} in the demo"));
    }
    let labeling: Labeling = labeling.parse().map_err(|e: repteach::Error| e.to_string())?;
    GridSpec::new(n, labeling).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

pub fn corrupt_view(n: usize, corruption: f64, seed: u64) -> Result<AlignmentView, String> {
    spec(n, "columns")?;
    let canonical = Representation::identity(n);
    let rep = corrupt_representation(&canonical, corruption, &mut rng_for(seed, &[])).map_err(|e| e.to_string())?;
    Ok(AlignmentView {
        n,
        placement: rep.placement().to_vec(),
        displaced: rep.displaced_from(&canonical),
        alignment: alignment(&canonical, &rep).map_err(|e| e.to_string())?,
    })
}

pub fn episode_view(
    n: usize,
    labeling: &str,
    corruption: f64,
    error_rate: f64,
    seed: u64,
) -> Result<EpisodeView, String> {
    let spec = spec(n, labeling)?;
    let truth = true_labels(&spec).map_err(|e| e.to_string())?;
    let canonical = Representation::identity(n);
    let mut rng = rng_for(seed, &[]);
    let rep = corrupt_representation(&canonical, corruption, &mut rng).map_err(|e| e.to_string())?;
    let beliefs = sample_beliefs(&truth, error_rate, &mut rng).map_err(|e| e.to_string())?;
    let teacher = TeacherConfig::new(rep, error_rate, TeacherKind::SelfCentered).map_err(|e| e.to_string())?;
    let sel = select_self_centered(&teacher, &beliefs).map_err(|e| e.to_string())?;
    let preds = classify_1nn(&canonical, &sel.set).map_err(|e| e.to_string())?;
    let predictions = preds.labels.clone();
    let (hits, total) = predictions
        .iter()
        .zip(truth.as_slice())
        .filter_map(|(p, t)| p.map(|p| p == *t))
        .fold((0, 0), |(h, n), ok| (h + usize::from(ok), n + 1));
    Ok(EpisodeView {
        n,
        k: spec.k(),
        alignment: alignment(&canonical, &teacher.representation).map_err(|e| e.to_string())?,
        teacher_placement: teacher.representation.placement().to_vec(),
        truth: truth.as_slice().to_vec(),
        beliefs: beliefs.labels().to_vec(),
        revealed: sel.set.items.iter().map(|it| (it.stimulus, it.label)).collect(),
        predictions,
        accuracy: if total == 0 { 0.0 } else { hits as f64 / total as f64 },
    })
}

/// A reduced dyadic sweep (corruption in steps of 0.05) for the heatmap.
pub fn curve_view(n: usize, labeling: &str, seeds_per_point: usize, seed: u64) -> Result<CurveView, String> {
    let spec = spec(n, labeling)?;
    let cfg = SweepConfig {
        corruption_levels: steps(20, 20),
        seeds_per_point,
        label_structures: vec![spec.labeling],
        ..SweepConfig::dyadic_default(seed)
    };
    let curve = build_dyadic_curve(&spec, &cfg).map_err(|e| e.to_string())?.pooled;
    Ok(CurveView {
        episodes: curve.total_count(),
        alignment_edges: curve.alignment_edges().to_vec(),
        error_edges: curve.error_edges().to_vec(),
        cells: curve
            .populated()
            .map(|(a, e, c)| CurveCell {
                alignment_lo: curve.alignment_edges()[a],
                error_lo: curve.error_edges()[e],
                mean: c.mean,
                count: c.count,
            })
            .collect(),
    })
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

/// Corrupts the canonical grid and reports the new placement and its alignment.
#[wasm_bindgen]
pub fn corrupt(n: usize, corruption: f64, seed: u64) -> Result<String, JsValue> {
    js(corrupt_view(n, corruption, seed).and_then(|v| to_json(&v)))
}

/// One self-centred teaching episode for a canonical 1-NN student.
#[wasm_bindgen]
pub fn episode(n: usize, labeling: &str, corruption: f64, error_rate: f64, seed: u64) -> Result<String, JsValue> {
    js(episode_view(n, labeling, corruption, error_rate, seed).and_then(|v| to_json(&v)))
}

/// Accuracy by (alignment, error-rate) bucket.
#[wasm_bindgen]
pub fn utility_curve(n: usize, labeling: &str, seeds_per_point: usize, seed: u64) -> Result<String, JsValue> {
    js(curve_view(n, labeling, seeds_per_point, seed).and_then(|v| to_json(&v)))
}
