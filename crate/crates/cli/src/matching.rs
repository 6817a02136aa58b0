use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};
use repteach::curves::{build_classroom_curve, CurveTable, Provenance, SweepConfig};
use repteach::matching::{
    run_matching, MatchingExperiment, MatchingRun, Method, DEFAULT_EPISODES, DEFAULT_PASS_THRESHOLD,
};
use repteach::pools::PoolConfig;
use repteach::seeds::{derive_seed, stream};
use serde::Serialize;

use crate::args::{config_json, PoolArgs, RunArgs};
use crate::output::OutputDir;

#[derive(Subcommand, Debug)]
pub enum MatchCommand {
    /// Match students to teachers on resampled pools and report outcomes.
    Run(RunMatchArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RunMatchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub pool: PoolArgs,
    /// Methods to run: random, mooc, ours, optimal, or all.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub methods: Vec<String>,
    /// Number of independently resampled pools.
    #[arg(long, default_value_t = 10)]
    pub pools: usize,
    /// Episodes (teacher belief/selection draws) per teacher.
    #[arg(long, default_value_t = DEFAULT_EPISODES)]
    pub episodes: usize,
    /// A student passes when their accuracy is at least this.
    #[arg(long, default_value_t = DEFAULT_PASS_THRESHOLD)]
    pub pass_threshold: f64,
    /// Output directory of a previous `curve classroom` run to use for the
    /// `ours` method; by default a classroom curve is built for this grid.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

pub fn parse_methods(names: &[String]) -> Result<Vec<Method>> {
    let mut methods = Vec::new();
    for name in names {
        if name.eq_ignore_ascii_case("all") {
            methods.extend(Method::ALL);
        } else {
            methods.push(name.parse::<Method>()?);
        }
    }
    methods.sort();
    methods.dedup();
    if methods.is_empty() {
        bail!("no matching methods requested");
    }
    Ok(methods)
}

/// Loads a curve written by `curve classroom` / `curve dyadic`.
pub fn load_curve(dir: &std::path::Path) -> Result<CurveTable> {
    let prov: Provenance = serde_json::from_str(
        &fs::read_to_string(dir.join("provenance.json"))
            .with_context(|| format!("no curve provenance in {}", dir.display()))?,
    )?;
    let csv =
        fs::read_to_string(dir.join("curve.csv")).with_context(|| format!("no curve.csv in {}", dir.display()))?;
    Ok(CurveTable::from_csv(&csv, prov)?)
}

/// The utility curve the `ours` method consults when none is supplied: a
/// classroom curve on the pool's grid and label structure.
pub fn default_curve(pool: &PoolConfig, seed: u64) -> Result<CurveTable> {
    let mut cfg = SweepConfig::classroom_default(derive_seed(seed, &[stream::CLASSROOM_CURVE]));
    cfg.label_structures = vec![pool.spec.labeling];
    Ok(build_classroom_curve(&pool.spec, &cfg)?.pooled)
}

#[derive(Serialize)]
struct PoolRow {
    pool: usize,
    method: Method,
    avg: f64,
    bottom10: f64,
    top10: f64,
    pass_rate: f64,
}

fn per_pool_rows(run: &MatchingRun) -> Vec<PoolRow> {
    let mut rows = Vec::new();
    for s in &run.summaries {
        for (p, r) in s.per_pool.iter().enumerate() {
            rows.push(PoolRow {
                pool: p,
                method: s.method,
                avg: r.avg_accuracy,
                bottom10: r.bottom_decile_mean,
                top10: r.top_decile_mean,
                pass_rate: r.pass_rate,
            });
        }
    }
    rows
}

fn print_table(run: &MatchingRun) {
    println!(
        "{:<8} {:>15} {:>15} {:>15} {:>15}",
        "method", "avg", "bottom10", "top10", "pass_rate"
    );
    for s in &run.summaries {
        let c = |m: repteach::matching::MeanSe| format!("{:.3} ± {:.3}", m.mean, m.se);
        println!(
            "{:<8} {:>15} {:>15} {:>15} {:>15}",
            s.method.as_str(),
            c(s.avg),
            c(s.bottom10),
            c(s.top10),
            c(s.pass_rate)
        );
    }
}

pub fn run(cmd: MatchCommand) -> Result<()> {
    let MatchCommand::Run(args) = cmd;
    let methods = parse_methods(&args.methods)?;
    let pool = args.pool.config(args.run.seed)?;
    let exp = MatchingExperiment {
        pool: pool.clone(),
        methods: methods.clone(),
        pools: args.pools,
        episodes: args.episodes,
        pass_threshold: args.pass_threshold,
        master_seed: args.run.seed,
    };
    let mut out = OutputDir::create(&args.run.out)?;
    let curve = match (&args.curve, methods.contains(&Method::Ours)) {
        (_, false) => None,
        (Some(dir), true) => Some(load_curve(dir)?),
        (None, true) => {
            let c = default_curve(&pool, args.run.seed)?;
            out.write("curve.csv", c.to_csv())?;
            Some(c)
        }
    };
    let result = run_matching(&exp, curve.as_ref())?;
    out.write("report.csv", result.to_csv())?;
    out.write_csv("per_pool.csv", &per_pool_rows(&result))?;
    out.finish("match run", Some(args.run.seed), config_json(&args))?;
    print_table(&result);
    Ok(())
}
