//! Student–teacher matching, outcome realisation and the student-centric
//! classroom experiments.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{
    centric_candidates, centroid_selection, sample_beliefs, score_1nn, select_student_centric, BeliefLabels, TeachItem,
    TeachingSet,
};
use crate::curves::CurveTable;
use crate::error::{check_unit, Error, Result};
use crate::grid::{true_labels, DistanceProfile, Representation, TrueLabels};
use crate::pools::{Pool, PoolConfig};
use crate::seeds::{derive_seed, rng_for, stream};
use crate::stats;

pub const DEFAULT_PASS_THRESHOLD: f64 = 0.45;
pub const DEFAULT_EPISODES: usize = 10;
pub const DEFAULT_T_ITERS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Random,
    Mooc,
    Ours,
    Optimal,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Random, Method::Mooc, Method::Ours, Method::Optimal];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Random => "random",
            Method::Mooc => "mooc",
            Method::Ours => "ours",
            Method::Optimal => "optimal",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Method::Random),
            "mooc" => Ok(Method::Mooc),
            "ours" => Ok(Method::Ours),
            "optimal" => Ok(Method::Optimal),
            other => Err(Error::Config(format!("unknown matching method '{other}'"))),
        }
    }
}

/// Student id → teacher id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub method: Method,
    pub teacher_of: Vec<usize>,
}

impl Assignment {
    pub fn validate(&self, pool: &Pool) -> Result<()> {
        if self.teacher_of.len() != pool.students.len() {
            return Err(Error::Coverage(format!(
                "assignment covers {} students, pool has {}",
                self.teacher_of.len(),
                pool.students.len()
            )));
        }
        if let Some((s, t)) = self
            .teacher_of
            .iter()
            .enumerate()
            .find(|(_, &t)| t >= pool.teachers.len())
        {
            return Err(Error::Coverage(format!("student {s} assigned to unknown teacher {t}")));
        }
        Ok(())
    }

    /// Student ids per teacher.
    pub fn classrooms(&self, teachers: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); teachers];
        for (s, &t) in self.teacher_of.iter().enumerate() {
            out[t].push(s);
        }
        out
    }
}

/// Where evaluation episodes draw their randomness from.
///
/// Teacher `t`'s episode `e` always uses the same seed, so every matching
/// method is graded against identical teaching sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalSeeds {
    pub seed: u64,
    pub episodes: usize,
}

impl EvalSeeds {
    pub fn new(seed: u64, episodes: usize) -> Result<Self> {
        if episodes == 0 {
            return Err(Error::Precondition("episode_seeds must be at least 1".into()));
        }
        Ok(EvalSeeds { seed, episodes })
    }
}

/// The teaching sets a self-centred teacher produces across evaluation episodes.
pub fn teacher_episode_sets(
    pool: &Pool,
    teacher: usize,
    truth: &TrueLabels,
    eval: EvalSeeds,
) -> Result<Vec<TeachingSet>> {
    let t = &pool.teachers[teacher];
    (0..eval.episodes)
        .map(|e| {
            let mut rng = rng_for(eval.seed, &[stream::EVAL, t.id as u64, e as u64]);
            let beliefs = sample_beliefs(truth, t.config.error_rate, &mut rng)?;
            Ok(centroid_selection(&t.config.representation, &beliefs)?.set)
        })
        .collect()
}

fn mean_score(student: &Representation, sets: &[TeachingSet], truth: &TrueLabels) -> f64 {
    sets.iter()
        .map(|ts| score_1nn(student, &ts.items, truth.as_slice()))
        .sum::<f64>()
        / sets.len() as f64
}

/// Per-student accuracy averaged over evaluation episodes.
///
/// Each teacher produces one teaching set per episode, shared by every
/// student assigned to it; students are scored against the true labels.
pub fn realize_outcomes(pool: &Pool, assignment: &Assignment, eval: EvalSeeds) -> Result<Vec<f64>> {
    assignment.validate(pool)?;
    let truth = true_labels(&pool.spec)?;
    let classrooms = assignment.classrooms(pool.teachers.len());
    let per_teacher: Vec<Vec<(usize, f64)>> = classrooms
        .par_iter()
        .enumerate()
        .map(|(t, members)| {
            if members.is_empty() {
                return Ok(Vec::new());
            }
            let sets = teacher_episode_sets(pool, t, &truth, eval)?;
            Ok(members
                .iter()
                .map(|&s| (s, mean_score(&pool.students[s].representation, &sets, &truth)))
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut out = vec![0.0; pool.students.len()];
    for (s, acc) in per_teacher.into_iter().flatten() {
        out[s] = acc;
    }
    Ok(out)
}

fn require_teachers(pool: &Pool) -> Result<()> {
    if pool.teachers.is_empty() {
        Err(Error::Precondition("pool has no teachers".into()))
    } else {
        Ok(())
    }
}

/// Index of the first maximum (ties → lowest index).
fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

pub fn match_random<R: Rng + ?Sized>(pool: &Pool, rng: &mut R) -> Result<Assignment> {
    require_teachers(pool)?;
    let m = pool.teachers.len();
    Ok(Assignment {
        method: Method::Random,
        teacher_of: (0..pool.students.len()).map(|_| rng.random_range(0..m)).collect(),
    })
}

/// Everyone goes to the lowest-error teacher.
pub fn match_mooc(pool: &Pool) -> Result<Assignment> {
    require_teachers(pool)?;
    let best = argmax(pool.teachers.iter().map(|t| -t.config.error_rate));
    Ok(Assignment {
        method: Method::Mooc,
        teacher_of: vec![best; pool.students.len()],
    })
}

/// Per student, the teacher with the highest curve-predicted accuracy.
pub fn match_ours(pool: &Pool, curve: &CurveTable) -> Result<Assignment> {
    require_teachers(pool)?;
    let teacher_profiles = pool
        .teachers
        .iter()
        .map(|t| DistanceProfile::new(&t.config.representation))
        .collect::<Result<Vec<_>>>()?;
    let teacher_of = pool
        .students
        .par_iter()
        .map(|s| {
            let sp = DistanceProfile::new(&s.representation)?;
            let scores = teacher_profiles
                .iter()
                .zip(&pool.teachers)
                .map(|(tp, t)| curve.lookup(sp.alignment(tp)?, t.config.error_rate))
                .collect::<Result<Vec<_>>>()?;
            Ok(argmax(scores))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Assignment {
        method: Method::Ours,
        teacher_of,
    })
}

/// Dyadic accuracy of every (student, teacher) pair, `[student][teacher]`.
pub fn dyadic_matrix(pool: &Pool, eval: EvalSeeds) -> Result<Vec<Vec<f64>>> {
    let truth = true_labels(&pool.spec)?;
    let sets = (0..pool.teachers.len())
        .into_par_iter()
        .map(|t| teacher_episode_sets(pool, t, &truth, eval))
        .collect::<Result<Vec<_>>>()?;
    Ok(pool
        .students
        .par_iter()
        .map(|s| {
            sets.iter()
                .map(|ts| mean_score(&s.representation, ts, &truth))
                .collect()
        })
        .collect())
}

/// Per student, the teacher with the best realised dyadic accuracy under `eval`.
pub fn match_optimal(pool: &Pool, eval: EvalSeeds) -> Result<Assignment> {
    require_teachers(pool)?;
    let matrix = dyadic_matrix(pool, eval)?;
    Ok(Assignment {
        method: Method::Optimal,
        teacher_of: matrix.into_iter().map(argmax).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeReport {
    pub avg_accuracy: f64,
    pub bottom_decile_mean: f64,
    pub top_decile_mean: f64,
    pub pass_rate: f64,
    pub per_student_accuracies: Vec<f64>,
}

/// Aggregate metrics; decile groups hold `max(1, ⌊0.1·n⌋)` students.
pub fn report(per_student: &[f64], pass_threshold: f64) -> Result<OutcomeReport> {
    if per_student.is_empty() {
        return Err(Error::Precondition("cannot report on zero students".into()));
    }
    let mut sorted = per_student.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let d = (n / 10).max(1);
    Ok(OutcomeReport {
        avg_accuracy: stats::mean(&sorted),
        bottom_decile_mean: stats::mean(&sorted[..d]),
        top_decile_mean: stats::mean(&sorted[n - d..]),
        pass_rate: sorted.iter().filter(|&&a| a >= pass_threshold).count() as f64 / n as f64,
        per_student_accuracies: per_student.to_vec(),
    })
}

/// A metric's mean and standard error across resampled pools.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

impl MeanSe {
    fn of(xs: &[f64]) -> Self {
        MeanSe {
            mean: stats::mean(xs),
            se: stats::std_error(xs),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub avg: MeanSe,
    pub bottom10: MeanSe,
    pub top10: MeanSe,
    pub pass_rate: MeanSe,
    pub per_pool: Vec<OutcomeReport>,
}

#[derive(Debug, Clone)]
pub struct MatchingRun {
    pub summaries: Vec<MethodSummary>,
    pub assignments: Vec<Vec<Assignment>>,
}

pub const REPORT_CSV_HEADER: &str =
    "method,avg,bottom10,top10,pass_rate,stderr_avg,stderr_bottom10,stderr_top10,stderr_pass_rate";

impl MatchingRun {
    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{REPORT_CSV_HEADER}\n");
        for s in &self.summaries {
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                s.method,
                s.avg.mean,
                s.bottom10.mean,
                s.top10.mean,
                s.pass_rate.mean,
                s.avg.se,
                s.bottom10.se,
                s.top10.se,
                s.pass_rate.se
            ));
        }
        out
    }
}

/// Settings for a full matching experiment over resampled pools.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchingExperiment {
    pub pool: PoolConfig,
    pub methods: Vec<Method>,
    pub pools: usize,
    pub episodes: usize,
    pub pass_threshold: f64,
    pub master_seed: u64,
}

/// Generates `pools` pools, runs every method on each, and summarises.
pub fn run_matching(exp: &MatchingExperiment, curve: Option<&CurveTable>) -> Result<MatchingRun> {
    if exp.pools == 0 {
        return Err(Error::Config("need at least one pool".into()));
    }
    if exp.methods.contains(&Method::Ours) && curve.is_none() {
        return Err(Error::Precondition("the 'ours' method needs a utility curve".into()));
    }
    // pools are independent; the ordered collect keeps results identical for
    // any worker count
    let per_pool = (0..exp.pools)
        .into_par_iter()
        .map(|p| {
            let pool_seed = derive_seed(exp.master_seed, &[stream::POOL, p as u64]);
            let cfg = PoolConfig {
                master_seed: pool_seed,
                ..exp.pool.clone()
            };
            let pool = Pool::generate(&cfg, &mut rng_for(pool_seed, &[]))?;
            let eval = EvalSeeds::new(derive_seed(exp.master_seed, &[stream::EVAL, p as u64]), exp.episodes)?;
            exp.methods
                .iter()
                .map(|&method| {
                    let a = match method {
                        Method::Random => {
                            match_random(&pool, &mut rng_for(exp.master_seed, &[stream::MATCH, p as u64]))?
                        }
                        Method::Mooc => match_mooc(&pool)?,
                        Method::Ours => match_ours(&pool, curve.expect("checked above"))?,
                        Method::Optimal => match_optimal(&pool, eval)?,
                    };
                    let acc = realize_outcomes(&pool, &a, eval)?;
                    Ok((report(&acc, exp.pass_threshold)?, a))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut reports: Vec<Vec<OutcomeReport>> = vec![Vec::with_capacity(exp.pools); exp.methods.len()];
    let mut assignments = Vec::with_capacity(exp.pools);
    for pool_results in per_pool {
        let mut pool_assignments = Vec::with_capacity(exp.methods.len());
        for (mi, (r, a)) in pool_results.into_iter().enumerate() {
            reports[mi].push(r);
            pool_assignments.push(a);
        }
        assignments.push(pool_assignments);
    }
    let summaries = exp
        .methods
        .iter()
        .zip(reports)
        .map(|(&method, per_pool)| {
            let col = |f: fn(&OutcomeReport) -> f64| per_pool.iter().map(f).collect::<Vec<_>>();
            MethodSummary {
                method,
                avg: MeanSe::of(&col(|r| r.avg_accuracy)),
                bottom10: MeanSe::of(&col(|r| r.bottom_decile_mean)),
                top10: MeanSe::of(&col(|r| r.top_decile_mean)),
                pass_rate: MeanSe::of(&col(|r| r.pass_rate)),
                per_pool,
            }
        })
        .collect();
    Ok(MatchingRun { summaries, assignments })
}

/// Settings for a student-centric teacher.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentricTeacher {
    pub error_rate: f64,
    pub t_iters: usize,
    pub episodes: usize,
    pub seed: u64,
}

/// Accuracy (against the true labels) of every classroom member under a
/// student-centric teacher, averaged over episodes. Each episode resamples
/// the teacher's beliefs and reruns its search over the whole classroom.
pub fn realize_centric(classroom: &[&Representation], truth: &TrueLabels, teacher: CentricTeacher) -> Result<Vec<f64>> {
    check_unit("error rate", teacher.error_rate)?;
    if teacher.episodes == 0 {
        return Err(Error::Precondition("episodes must be at least 1".into()));
    }
    let mut acc = vec![0.0; classroom.len()];
    for e in 0..teacher.episodes {
        let mut rng = rng_for(teacher.seed, &[stream::CENTRIC, e as u64]);
        let beliefs = sample_beliefs(truth, teacher.error_rate, &mut rng)?;
        let choice = select_student_centric(&beliefs, classroom, teacher.t_iters, &mut rng)?;
        for (a, s) in acc.iter_mut().zip(classroom) {
            *a += score_1nn(s, &choice.set.items, truth.as_slice());
        }
    }
    acc.iter_mut().for_each(|a| *a /= teacher.episodes as f64);
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyOutcome {
    /// Final classroom, in order of admission.
    pub members: Vec<usize>,
    /// Centric accuracy minus base accuracy for each final member.
    pub gains: Vec<f64>,
    /// The student whose admission failed to improve on their base accuracy.
    pub stopping_student: Option<usize>,
    pub stopping_gain: Option<f64>,
}

impl GreedyOutcome {
    pub fn mean_gain(&self) -> Option<f64> {
        (!self.gains.is_empty()).then(|| stats::mean(&self.gains))
    }
}

/// Per-episode greedy state: the teacher's beliefs, its candidate example
/// sets, and each candidate's summed believed score over the classroom so far.
type EpisodeState = (BeliefLabels, Vec<Vec<TeachItem>>, Vec<f64>);

/// Greedily admits the lowest-performing students into one student-centric
/// teacher's classroom until the newest admission no longer beats its base accuracy.
pub fn greedy_student_centric(pool: &Pool, base: &[f64], teacher: CentricTeacher) -> Result<GreedyOutcome> {
    if base.len() != pool.students.len() {
        return Err(Error::Coverage(format!(
            "base outcomes cover {} students, pool has {}",
            base.len(),
            pool.students.len()
        )));
    }
    check_unit("error rate", teacher.error_rate)?;
    if teacher.episodes == 0 || teacher.t_iters == 0 {
        return Err(Error::Precondition("episodes and t_iters must be at least 1".into()));
    }
    let truth = true_labels(&pool.spec)?;
    // The candidate sets of each episode do not depend on the classroom, so the
    // believed score of every candidate can be accumulated one student at a
    // time instead of rescoring the whole classroom after each admission.
    let mut episodes = (0..teacher.episodes)
        .map(|e| {
            let mut rng = rng_for(teacher.seed, &[stream::CENTRIC, e as u64]);
            let beliefs = sample_beliefs(&truth, teacher.error_rate, &mut rng)?;
            let candidates = centric_candidates(&beliefs, teacher.t_iters, &mut rng);
            let sums = vec![0.0; candidates.len()];
            Ok((beliefs, candidates, sums))
        })
        .collect::<Result<Vec<_>>>()?;
    let chosen = |episodes: &[EpisodeState], size: usize| -> Vec<usize> {
        episodes
            .iter()
            .map(|(_, _, sums)| {
                let mut best = 0;
                for (i, s) in sums.iter().enumerate() {
                    if s / size as f64 > sums[best] / size as f64 {
                        best = i;
                    }
                }
                best
            })
            .collect()
    };
    let realized = |episodes: &[EpisodeState], picks: &[usize], s: usize| {
        let rep = &pool.students[s].representation;
        episodes
            .iter()
            .zip(picks)
            .map(|((_, cands, _), &c)| score_1nn(rep, &cands[c], truth.as_slice()))
            .sum::<f64>()
            / episodes.len() as f64
    };

    let mut order: Vec<usize> = (0..base.len()).collect();
    order.sort_by(|&a, &b| base[a].total_cmp(&base[b]).then(a.cmp(&b)));
    let mut members: Vec<usize> = Vec::new();
    let mut picks = Vec::new();
    let mut stopping = None;
    for &s in &order {
        let rep = &pool.students[s].representation;
        let scores: Vec<Vec<f64>> = episodes
            .iter()
            .map(|(beliefs, cands, _)| cands.iter().map(|c| score_1nn(rep, c, beliefs.labels())).collect())
            .collect();
        for ((_, _, sums), sc) in episodes.iter_mut().zip(&scores) {
            sums.iter_mut().zip(sc).for_each(|(t, v)| *t += v);
        }
        let trial = chosen(&episodes, members.len() + 1);
        let newest_gain = realized(&episodes, &trial, s) - base[s];
        if newest_gain <= 0.0 {
            stopping = Some((s, newest_gain));
            break;
        }
        members.push(s);
        picks = trial;
    }
    let gains = members
        .iter()
        .map(|&m| realized(&episodes, &picks, m) - base[m])
        .collect();
    Ok(GreedyOutcome {
        members,
        gains,
        stopping_student: stopping.map(|s| s.0),
        stopping_gain: stopping.map(|s| s.1),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizePoint {
    pub size: usize,
    pub mean_accuracy: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizeSweep {
    pub sizes: Vec<usize>,
    pub error_rates: Vec<f64>,
    pub samples: usize,
    pub t_iters: usize,
    pub episodes: usize,
    pub seed: u64,
}

/// Mean classroom accuracy under a student-centric teacher per classroom size,
/// marginalised over error rates and random classroom draws.
pub fn classroom_size_sweep(pool: &Pool, sweep: &SizeSweep) -> Result<Vec<SizePoint>> {
    if sweep.samples == 0 {
        return Err(Error::Config("samples must be at least 1".into()));
    }
    for &e in &sweep.error_rates {
        check_unit("error rate", e)?;
    }
    if let Some(&bad) = sweep.sizes.iter().find(|&&s| s == 0 || s > pool.students.len()) {
        return Err(Error::Config(format!(
            "classroom size {bad} outside 1..={}",
            pool.students.len()
        )));
    }
    let truth = true_labels(&pool.spec)?;
    sweep
        .sizes
        .iter()
        .enumerate()
        .map(|(si, &size)| {
            let jobs: Vec<(usize, usize)> = (0..sweep.error_rates.len())
                .flat_map(|ei| (0..sweep.samples).map(move |k| (ei, k)))
                .collect();
            let means = jobs
                .par_iter()
                .map(|&(ei, k)| {
                    let path = [stream::SIZE_SWEEP, si as u64, ei as u64, k as u64];
                    let mut rng = rng_for(sweep.seed, &path);
                    let picked = index::sample(&mut rng, pool.students.len(), size);
                    let reps: Vec<&Representation> = picked.iter().map(|i| &pool.students[i].representation).collect();
                    let teacher = CentricTeacher {
                        error_rate: sweep.error_rates[ei],
                        t_iters: sweep.t_iters,
                        episodes: sweep.episodes,
                        seed: derive_seed(sweep.seed, &path),
                    };
                    Ok(stats::mean(&realize_centric(&reps, &truth, teacher)?))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(SizePoint {
                size,
                mean_accuracy: stats::mean(&means),
                stderr: stats::std_error(&means),
            })
        })
        .collect()
}
