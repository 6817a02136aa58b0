use anyhow::Result;
use clap::{Args, Subcommand};
use repteach::curves::{
    alignment_trend, build_classroom_curve, build_dyadic_curve, structure_rank_correlation, CurveBuild, SweepConfig,
};
use repteach::grid::{GridSpec, Labeling};
use serde::Serialize;

use crate::args::{config_json, RunArgs};
use crate::output::OutputDir;

#[derive(Subcommand, Debug)]
pub enum CurveCommand {
    /// Utility curve from one teacher and one canonical student per episode.
    Dyadic(CurveArgs),
    /// Utility curve where the students are corrupted as well.
    Classroom(CurveArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CurveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value_t = 6)]
    pub grid_size: usize,
    /// Label structures to sweep (comma separated). Defaults: columns,quadrants
    /// for the dyadic curve, columns for the classroom curve.
    #[arg(long, value_delimiter = ',')]
    pub labeling: Vec<Labeling>,
    /// Seeds per (error rate, corruption level) point.
    #[arg(long, default_value_t = 10)]
    pub seeds_per_point: usize,
}

#[derive(Serialize)]
struct CurveSummary {
    episodes: u64,
    populated_buckets: usize,
    /// Spearman correlation between the first two per-structure curves.
    structure_rank_correlation: Option<f64>,
    /// Spearman(alignment, accuracy) per error bucket, for populated buckets.
    alignment_trends: Vec<Trend>,
}

#[derive(Serialize)]
struct Trend {
    error_lo: f64,
    spearman: Option<f64>,
}

pub fn run(cmd: CurveCommand) -> Result<()> {
    let (name, args, dyadic) = match cmd {
        CurveCommand::Dyadic(a) => ("curve dyadic", a, true),
        CurveCommand::Classroom(a) => ("curve classroom", a, false),
    };
    let mut args = args;
    if args.labeling.is_empty() {
        args.labeling = if dyadic {
            vec![Labeling::Columns, Labeling::Quadrants]
        } else {
            vec![Labeling::Columns]
        };
    }
    let spec = GridSpec::new(args.grid_size, args.labeling[0])?;
    let mut cfg = if dyadic {
        SweepConfig::dyadic_default(args.run.seed)
    } else {
        SweepConfig::classroom_default(args.run.seed)
    };
    cfg.label_structures = args.labeling.clone();
    cfg.seeds_per_point = args.seeds_per_point;

    let mut out = OutputDir::create(&args.run.out)?;
    let build = if dyadic {
        build_dyadic_curve(&spec, &cfg)?
    } else {
        build_classroom_curve(&spec, &cfg)?
    };
    write_curves(&mut out, &build)?;
    out.finish(name, Some(args.run.seed), config_json(&args))?;
    Ok(())
}

fn write_curves(out: &mut OutputDir, build: &CurveBuild) -> Result<()> {
    out.write("curve.csv", build.pooled.to_csv())?;
    for (l, table) in &build.per_structure {
        out.write(&format!("curve_{l}.csv"), table.to_csv())?;
    }
    let rank = match build.per_structure.as_slice() {
        [(_, a), (_, b), ..] => structure_rank_correlation(a, b).ok(),
        _ => None,
    };
    let summary = CurveSummary {
        episodes: build.pooled.provenance.episodes,
        populated_buckets: build.pooled.populated().count(),
        structure_rank_correlation: rank,
        alignment_trends: (0..build.pooled.error_buckets())
            .map(|e| Trend {
                error_lo: build.pooled.error_edges()[e],
                spearman: alignment_trend(&build.pooled, e),
            })
            .collect(),
    };
    out.write_json("summary.json", &summary)?;
    out.write_json("provenance.json", &build.pooled.provenance)
}
