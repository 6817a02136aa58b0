//! `repteach` — seeded experiments for teaching under representational
//! misalignment. Every run writes CSV/JSON artifacts plus a `manifest.json`
//! with SHA-256 digests of everything it produced.

mod args;
mod centric;
mod curve;
mod matching;
mod output;
mod pool;
mod study;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "repteach",
    version,
    about = "Teacher–student representational alignment simulator"
)]
struct Cli {
    /// Worker threads for sweeps and pool resampling (results do not depend on it).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build teacher utility curves.
    #[command(subcommand)]
    Curve(curve::CurveCommand),
    /// Generate student/teacher pools.
    #[command(subcommand)]
    Pool(pool::PoolCommand),
    /// Student–teacher matching experiments.
    #[command(subcommand)]
    Match(matching::MatchCommand),
    /// Student-centric teacher experiments.
    #[command(subcommand)]
    Centric(centric::CentricCommand),
    /// Human-study conditions, response ingestion and analyses.
    #[command(subcommand)]
    Study(study::StudyCommand),
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build_global()
            .context("cannot configure the worker pool")?;
    }
    match cli.command {
        Command::Curve(c) => curve::run(c),
        Command::Pool(c) => pool::run(c),
        Command::Match(c) => matching::run(c),
        Command::Centric(c) => centric::run(c),
        Command::Study(c) => study::run(c),
    }
}
