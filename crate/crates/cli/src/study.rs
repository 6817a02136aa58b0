use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};
use repteach::grid::Labeling;
use repteach::seeds::{derive_seed, rng_for, stream};
use repteach::study_io::{
    export_conditions, ingest_responses, posthoc_error, regress_alignment_accuracy, ConditionFile, ConditionSummary,
    IngestReport, RejectReason, ResponseFile, StimulusKind,
};
use serde::Serialize;

use crate::args::{config_json, RunArgs};
use crate::output::OutputDir;

#[derive(Subcommand, Debug)]
pub enum StudyCommand {
    /// Write one condition file per (stimulus kind, label structure, alignment level).
    ExportConditions(ExportArgs),
    /// Validate and score participant response files.
    Ingest(IngestArgs),
    /// Rescore participants against truth labels corrupted at each error rate.
    Posthoc(PosthocArgs),
    /// Regress per-condition accuracy on teacher alignment.
    Regress(RegressArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ExportArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    /// Teacher alignment levels, evenly spaced from 1 down to 0.
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    #[arg(long, value_delimiter = ',', default_value = "columns,quadrants")]
    pub labeling: Vec<Labeling>,
    /// Grid side for every stimulus kind (default: 6 for simple_features, 7 for salient_dinos).
    #[arg(long)]
    pub grid_size: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct StudyInputs {
    /// Directory of condition files (an `export-conditions` output directory works).
    #[arg(long)]
    pub conditions: PathBuf,
    /// Directory of participant response files (*.json).
    #[arg(long)]
    pub responses: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct IngestArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub inputs: StudyInputs,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PosthocArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub inputs: StudyInputs,
    /// Assumed teacher error rates (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5")]
    pub epsilon: Vec<f64>,
    /// Label corruptions averaged per (participant, error rate).
    #[arg(long, default_value_t = 100)]
    pub seeds: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RegressArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    /// Per-condition summary written by `study ingest` (conditions.csv).
    #[arg(long)]
    pub summary: PathBuf,
    /// Label permutations for the p-value.
    #[arg(long, default_value_t = 10_000)]
    pub permutations: usize,
}

fn json_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot read directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && p.is_file())
        .collect();
    files.sort();
    Ok(files)
}

pub fn load_conditions(dir: &Path) -> Result<Vec<ConditionFile>> {
    let nested = dir.join("conditions");
    let dir = if nested.is_dir() { nested } else { dir.to_path_buf() };
    let mut conds = Vec::new();
    for path in json_files(&dir)? {
        if path.file_name().is_some_and(|n| n == crate::output::MANIFEST_NAME) {
            continue;
        }
        let text = fs::read_to_string(&path)?;
        let c: ConditionFile =
            serde_json::from_str(&text).with_context(|| format!("invalid condition file {}", path.display()))?;
        c.validate()
            .with_context(|| format!("invalid condition file {}", path.display()))?;
        conds.push(c);
    }
    if conds.is_empty() {
        bail!("no condition files in {}", dir.display());
    }
    Ok(conds)
}

fn load_responses(dir: &Path) -> Result<Vec<(String, std::result::Result<ResponseFile, RejectReason>)>> {
    json_files(dir)?
        .into_iter()
        .map(|path| {
            let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
            let parsed = fs::read_to_string(&path)
                .map_err(|e| e.to_string())
                .and_then(|t| serde_json::from_str::<ResponseFile>(&t).map_err(|e| e.to_string()))
                .map_err(|message| RejectReason::Unreadable { message });
            Ok((name, parsed))
        })
        .collect()
}

/// Loaded conditions, the accepted responses (by file name) and the ingest report.
type Ingested = (Vec<ConditionFile>, Vec<(String, ResponseFile)>, IngestReport);

fn ingest(inputs: &StudyInputs) -> Result<Ingested> {
    let conds = load_conditions(&inputs.conditions)?;
    let responses = load_responses(&inputs.responses)?;
    // keep accepted files for the posthoc analysis
    let parsed: Vec<(String, ResponseFile)> = responses
        .iter()
        .filter_map(|(n, r)| r.as_ref().ok().map(|r| (n.clone(), r.clone())))
        .collect();
    let report = ingest_responses(&conds, responses)?;
    let accepted = parsed
        .into_iter()
        .filter(|(n, _)| report.participants.iter().any(|p| &p.source == n))
        .collect();
    Ok((conds, accepted, report))
}

#[derive(Serialize)]
struct ConditionIndexRow<'a> {
    condition_id: &'a str,
    file: String,
    stimulus_kind: StimulusKind,
    labeling: Labeling,
    grid_size: usize,
    target_alignment: f64,
    teacher_alignment: f64,
    revealed: usize,
}

#[derive(Serialize)]
struct RejectedRow {
    source: String,
    reason: String,
    message: String,
}

#[derive(Serialize)]
struct PosthocRow<'a> {
    source: &'a str,
    condition_id: &'a str,
    participant_id: &'a str,
    epsilon: f64,
    base_accuracy: f64,
    accuracy: f64,
    stderr: f64,
}

#[derive(Serialize)]
struct RegressionRow {
    group: String,
    n: usize,
    slope: f64,
    intercept: f64,
    r: f64,
    p_value: f64,
    permutations: usize,
    method: &'static str,
}

fn export(args: ExportArgs) -> Result<()> {
    let kinds: Vec<(StimulusKind, usize)> = [StimulusKind::SimpleFeatures, StimulusKind::SalientDinos]
        .into_iter()
        .map(|k| (k, args.grid_size.unwrap_or(k.default_grid_size())))
        .collect();
    let mut out = OutputDir::create(&args.run.out)?;
    let mut rng = rng_for(args.run.seed, &[stream::STUDY]);
    let conds = export_conditions(&kinds, &args.labeling, args.levels, &mut rng)?;
    let mut index = Vec::new();
    for c in &conds {
        let file = format!("conditions/{}.json", c.condition_id);
        out.write_json(&file, c)?;
        index.push(ConditionIndexRow {
            condition_id: &c.condition_id,
            file,
            stimulus_kind: c.stimulus_kind,
            labeling: c.spec.labeling,
            grid_size: c.spec.n,
            target_alignment: c.target_alignment,
            teacher_alignment: c.teacher_alignment,
            revealed: c.revealed.len(),
        });
    }
    out.write_csv("conditions.csv", &index)?;
    out.finish("study export-conditions", Some(args.run.seed), config_json(&args))?;
    println!("{} conditions written", conds.len());
    Ok(())
}

fn run_ingest(args: IngestArgs) -> Result<()> {
    let mut out = OutputDir::create(&args.out)?;
    let (_, _, report) = ingest(&args.inputs)?;
    let rejected: Vec<RejectedRow> = report
        .rejected
        .iter()
        .map(|(source, reason)| RejectedRow {
            source: source.clone(),
            reason: serde_json::to_value(reason)
                .ok()
                .and_then(|v| v["reason"].as_str().map(str::to_string))
                .unwrap_or_default(),
            message: reason.to_string(),
        })
        .collect();
    out.write_csv("participants.csv", &report.participants)?;
    out.write_csv("conditions.csv", &report.conditions)?;
    out.write_csv("rejected.csv", &rejected)?;
    out.finish("study ingest", None, config_json(&args))?;
    println!(
        "{} accepted, {} rejected, {} conditions",
        report.participants.len(),
        report.rejected.len(),
        report.conditions.len()
    );
    for r in &rejected {
        eprintln!("rejected {}: {}", r.source, r.message);
    }
    Ok(())
}

fn posthoc(args: PosthocArgs) -> Result<()> {
    let mut out = OutputDir::create(&args.run.out)?;
    let (conds, accepted, report) = ingest(&args.inputs)?;
    let mut rows = Vec::new();
    for (pi, ((source, resp), result)) in accepted.iter().zip(&report.participants).enumerate() {
        debug_assert_eq!(source, &result.source);
        let cond = conds
            .iter()
            .find(|c| c.condition_id == resp.condition_id)
            .expect("accepted responses reference a known condition");
        let truth = cond.true_labels()?;
        let seed = derive_seed(args.run.seed, &[stream::STUDY, pi as u64]);
        for p in posthoc_error(&resp.responses, &truth, &args.epsilon, args.seeds, seed)? {
            rows.push(PosthocRow {
                source,
                condition_id: &resp.condition_id,
                participant_id: &resp.participant_id,
                epsilon: p.epsilon,
                base_accuracy: result.accuracy,
                accuracy: p.mean_accuracy,
                stderr: p.stderr,
            });
        }
    }
    out.write_csv("posthoc.csv", &rows)?;
    out.finish("study posthoc", Some(args.run.seed), config_json(&args))?;
    println!(
        "{} participants rescored at {} error rates",
        accepted.len(),
        args.epsilon.len()
    );
    Ok(())
}

fn regress(args: RegressArgs) -> Result<()> {
    let mut reader =
        csv::Reader::from_path(&args.summary).with_context(|| format!("cannot read {}", args.summary.display()))?;
    let summaries = reader
        .deserialize::<ConditionSummary>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .with_context(|| format!("invalid condition summary {}", args.summary.display()))?;
    let mut out = OutputDir::create(&args.run.out)?;
    let mut groups: Vec<(String, Vec<(f64, f64)>)> = vec![(
        "all".into(),
        summaries
            .iter()
            .map(|s| (s.teacher_alignment, s.mean_accuracy))
            .collect(),
    )];
    for kind in [StimulusKind::SimpleFeatures, StimulusKind::SalientDinos] {
        let pts: Vec<(f64, f64)> = summaries
            .iter()
            .filter(|s| s.stimulus_kind == kind)
            .map(|s| (s.teacher_alignment, s.mean_accuracy))
            .collect();
        if !pts.is_empty() {
            groups.push((kind.to_string(), pts));
        }
    }
    let mut rows = Vec::new();
    for (gi, (group, pts)) in groups.into_iter().enumerate() {
        let mut rng = rng_for(args.run.seed, &[stream::STUDY, gi as u64]);
        match regress_alignment_accuracy(&pts, args.permutations, &mut rng) {
            Ok(reg) => rows.push(RegressionRow {
                group,
                n: reg.n,
                slope: reg.slope,
                intercept: reg.intercept,
                r: reg.r,
                p_value: reg.p_value,
                permutations: reg.permutations,
                method: "permutation",
            }),
            // the pooled fit must succeed; per-kind groups may be too small
            Err(e) if gi == 0 => return Err(e.into()),
            Err(e) => eprintln!("skipping group {group}: {e}"),
        }
    }
    out.write_csv("regression.csv", &rows)?;
    out.finish("study regress", Some(args.run.seed), config_json(&args))?;
    for r in &rows {
        println!(
            "{}: slope {:.4}, r {:.3}, p {:.4} (n = {})",
            r.group, r.slope, r.r, r.p_value, r.n
        );
    }
    Ok(())
}

pub fn run(cmd: StudyCommand) -> Result<()> {
    match cmd {
        StudyCommand::ExportConditions(a) => export(a),
        StudyCommand::Ingest(a) => run_ingest(a),
        StudyCommand::Posthoc(a) => posthoc(a),
        StudyCommand::Regress(a) => regress(a),
    }
}
