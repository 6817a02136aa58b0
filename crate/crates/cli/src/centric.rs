use anyhow::Result;
use clap::{Args, Subcommand};
use rayon::prelude::*;
use repteach::grid::{GridSpec, Labeling};
use repteach::matching::{
    classroom_size_sweep, greedy_student_centric, match_ours, realize_outcomes, CentricTeacher, EvalSeeds,
    GreedyOutcome, SizeSweep, DEFAULT_EPISODES, DEFAULT_T_ITERS,
};
use repteach::pools::{Pool, PoolConfig};
use repteach::seeds::{derive_seed, rng_for, stream};
use repteach::stats;
use serde::Serialize;

use crate::args::{config_json, RunArgs};
use crate::matching::default_curve;
use crate::output::OutputDir;

#[derive(Subcommand, Debug)]
pub enum CentricCommand {
    /// Grow a student-centric classroom from the lowest-performing students.
    Greedy(GreedyArgs),
    /// Classroom accuracy under a student-centric teacher versus classroom size.
    SizeSweep(SizeSweepArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CentricArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value_t = 6)]
    pub grid_size: usize,
    #[arg(long, default_value_t = Labeling::Rows)]
    pub labeling: Labeling,
    /// Teacher error rates (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5")]
    pub epsilons: Vec<f64>,
    /// Random candidate sets the teacher scores per episode.
    #[arg(long, default_value_t = DEFAULT_T_ITERS)]
    pub t_iters: usize,
    #[arg(long, default_value_t = DEFAULT_EPISODES)]
    pub episodes: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GreedyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub centric: CentricArgs,
    /// Independent greedy runs per error rate.
    #[arg(long, default_value_t = 20)]
    pub seeds: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SizeSweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub centric: CentricArgs,
    /// Classroom sizes (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20,50,100")]
    pub sizes: Vec<usize>,
    /// Random classrooms per (size, error rate).
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
}

/// The structured pool both experiments draw from.
fn structured_pool(args: &CentricArgs) -> Result<Pool> {
    let seed = derive_seed(args.run.seed, &[stream::POOL]);
    let cfg = PoolConfig::structured(seed).with_spec(GridSpec::new(args.grid_size, args.labeling)?);
    cfg.validate()?;
    Ok(Pool::generate(&cfg, &mut rng_for(seed, &[]))?)
}

#[derive(Serialize)]
struct BaseRow {
    student: usize,
    cluster: Option<usize>,
    base_accuracy: f64,
}

#[derive(Serialize)]
struct GreedyRow {
    epsilon: f64,
    run: usize,
    size: usize,
    mean_gain: Option<f64>,
    max_gain: Option<f64>,
    /// Cluster holding most of the final classroom.
    majority_cluster: Option<usize>,
    majority_share: Option<f64>,
    stopping_student: Option<usize>,
    stopping_gain: Option<f64>,
}

#[derive(Serialize)]
struct GreedySummaryRow {
    epsilon: f64,
    runs: usize,
    mean_size: f64,
    stderr_size: f64,
    mean_gain: Option<f64>,
    max_gain: Option<f64>,
}

#[derive(Serialize)]
struct Membership<'a> {
    epsilon: f64,
    run: usize,
    members: &'a [usize],
    gains: &'a [f64],
}

fn majority(pool: &Pool, members: &[usize]) -> Option<(usize, f64)> {
    let mut counts = std::collections::BTreeMap::new();
    for &m in members {
        if let Some(c) = pool.students[m].cluster {
            *counts.entry(c).or_insert(0usize) += 1;
        }
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(c, n)| (c, n as f64 / members.len() as f64))
}

fn greedy(args: GreedyArgs) -> Result<()> {
    let c = &args.centric;
    let pool = structured_pool(c)?;
    let mut out = OutputDir::create(&c.run.out)?;
    // base outcomes: the curve-based matching on the same pool
    let curve = default_curve(&pool.config, c.run.seed)?;
    let assignment = match_ours(&pool, &curve)?;
    let eval = EvalSeeds::new(derive_seed(c.run.seed, &[stream::EVAL]), c.episodes)?;
    let base = realize_outcomes(&pool, &assignment, eval)?;

    let jobs: Vec<(usize, usize)> = (0..c.epsilons.len())
        .flat_map(|ei| (0..args.seeds).map(move |s| (ei, s)))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(ei, s)| {
            let teacher = CentricTeacher {
                error_rate: c.epsilons[ei],
                t_iters: c.t_iters,
                episodes: c.episodes,
                seed: derive_seed(c.run.seed, &[stream::CENTRIC, ei as u64, s as u64]),
            };
            greedy_student_centric(&pool, &base, teacher)
        })
        .collect::<repteach::Result<Vec<GreedyOutcome>>>()?;

    let runs: Vec<GreedyRow> = jobs
        .iter()
        .zip(&outcomes)
        .map(|(&(ei, s), o)| {
            let maj = majority(&pool, &o.members);
            GreedyRow {
                epsilon: c.epsilons[ei],
                run: s,
                size: o.members.len(),
                mean_gain: o.mean_gain(),
                max_gain: o.gains.iter().copied().reduce(f64::max),
                majority_cluster: maj.map(|m| m.0),
                majority_share: maj.map(|m| m.1),
                stopping_student: o.stopping_student,
                stopping_gain: o.stopping_gain,
            }
        })
        .collect();
    let summary: Vec<GreedySummaryRow> = c
        .epsilons
        .iter()
        .enumerate()
        .map(|(ei, &epsilon)| {
            // jobs are laid out error-rate-major
            let rows = &runs[ei * args.seeds..(ei + 1) * args.seeds];
            let sizes: Vec<f64> = rows.iter().map(|r| r.size as f64).collect();
            let gains: Vec<f64> = rows.iter().filter_map(|r| r.mean_gain).collect();
            GreedySummaryRow {
                epsilon,
                runs: rows.len(),
                mean_size: stats::mean(&sizes),
                stderr_size: stats::std_error(&sizes),
                mean_gain: (!gains.is_empty()).then(|| stats::mean(&gains)),
                max_gain: gains.iter().copied().reduce(f64::max),
            }
        })
        .collect();
    let members: Vec<Membership> = jobs
        .iter()
        .zip(&outcomes)
        .map(|(&(ei, s), o)| Membership {
            epsilon: c.epsilons[ei],
            run: s,
            members: &o.members,
            gains: &o.gains,
        })
        .collect();
    let base_rows: Vec<BaseRow> = pool
        .students
        .iter()
        .zip(&base)
        .map(|(s, &b)| BaseRow {
            student: s.id,
            cluster: s.cluster,
            base_accuracy: b,
        })
        .collect();

    out.write_csv("base.csv", &base_rows)?;
    out.write_csv("greedy_runs.csv", &runs)?;
    out.write_csv("greedy_summary.csv", &summary)?;
    out.write_json("greedy_members.json", &members)?;
    out.finish("centric greedy", Some(c.run.seed), config_json(&args))?;
    for r in &summary {
        println!(
            "epsilon {:.2}: mean size {:.1} ± {:.1}, mean gain {}",
            r.epsilon,
            r.mean_size,
            r.stderr_size,
            r.mean_gain.map_or("-".into(), |g| format!("{g:+.3}"))
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct SizeRow {
    size: usize,
    mean_accuracy: f64,
    stderr: f64,
}

fn size_sweep(args: SizeSweepArgs) -> Result<()> {
    let c = &args.centric;
    let pool = structured_pool(c)?;
    let mut out = OutputDir::create(&c.run.out)?;
    let sweep = SizeSweep {
        sizes: args.sizes.clone(),
        error_rates: c.epsilons.clone(),
        samples: args.samples,
        t_iters: c.t_iters,
        episodes: c.episodes,
        seed: derive_seed(c.run.seed, &[stream::SIZE_SWEEP]),
    };
    let rows: Vec<SizeRow> = classroom_size_sweep(&pool, &sweep)?
        .into_iter()
        .map(|p| SizeRow {
            size: p.size,
            mean_accuracy: p.mean_accuracy,
            stderr: p.stderr,
        })
        .collect();
    out.write_csv("size_sweep.csv", &rows)?;
    out.finish("centric size-sweep", Some(c.run.seed), config_json(&args))?;
    for r in &rows {
        println!("size {:>4}: {:.3} ± {:.3}", r.size, r.mean_accuracy, r.stderr);
    }
    Ok(())
}

pub fn run(cmd: CentricCommand) -> Result<()> {
    match cmd {
        CentricCommand::Greedy(a) => greedy(a),
        CentricCommand::SizeSweep(a) => size_sweep(a),
    }
}
