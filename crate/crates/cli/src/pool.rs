use anyhow::Result;
use clap::{Args, Subcommand};
use repteach::grid::{DistanceProfile, Representation};
use repteach::pools::Pool;
use repteach::seeds::rng_for;
use serde::Serialize;

use crate::args::{config_json, PoolArgs, RunArgs};
use crate::output::OutputDir;

#[derive(Subcommand, Debug)]
pub enum PoolCommand {
    /// Sample a pool and write it with per-agent summaries.
    Generate(GenerateArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub pool: PoolArgs,
}

#[derive(Serialize)]
struct StudentRow {
    id: usize,
    cluster: Option<usize>,
    corruption: f64,
    canonical_alignment: f64,
}

#[derive(Serialize)]
struct TeacherRow {
    id: usize,
    cluster: Option<usize>,
    corruption: f64,
    error_rate: f64,
    canonical_alignment: f64,
}

pub fn run(cmd: PoolCommand) -> Result<()> {
    let PoolCommand::Generate(args) = cmd;
    let cfg = args.pool.config(args.run.seed)?;
    let mut out = OutputDir::create(&args.run.out)?;
    let pool = Pool::generate(&cfg, &mut rng_for(args.run.seed, &[]))?;
    let canonical = DistanceProfile::new(&Representation::identity(pool.spec.n))?;
    let students = pool
        .students
        .iter()
        .map(|s| {
            Ok(StudentRow {
                id: s.id,
                cluster: s.cluster,
                corruption: s.corruption,
                canonical_alignment: canonical.alignment(&DistanceProfile::new(&s.representation)?)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let teachers = pool
        .teachers
        .iter()
        .map(|t| {
            Ok(TeacherRow {
                id: t.id,
                cluster: t.cluster,
                corruption: t.corruption,
                error_rate: t.config.error_rate,
                canonical_alignment: canonical.alignment(&DistanceProfile::new(&t.config.representation)?)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.write_json("pool.json", &pool)?;
    out.write_csv("students.csv", &students)?;
    out.write_csv("teachers.csv", &teachers)?;
    out.finish("pool generate", Some(args.run.seed), config_json(&args))?;
    Ok(())
}
