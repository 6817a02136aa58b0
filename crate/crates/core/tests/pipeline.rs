//! Cross-module checks: matching dominance, degenerate pools, and the study
//! export/ingest round trip.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use repteach::agents::score_1nn;
use repteach::curves::{build_classroom_curve, error_bucket, Cell, CurveTable, SweepConfig};
use repteach::grid::{GridSpec, Labeling, Representation};
use repteach::matching::{
    dyadic_matrix, match_mooc, match_optimal, match_ours, match_random, realize_outcomes, run_matching, EvalSeeds,
    MatchingExperiment, Method,
};
use repteach::pools::{Pool, PoolConfig};
use repteach::seeds::rng_for;
use repteach::stats::mean;
use repteach::study_io::{
    export_conditions, ingest_responses, simulate_1nn_participant, ConditionFile, ResponseFile, StimulusKind,
};

fn small_pool(seed: u64) -> Pool {
    let cfg = PoolConfig {
        n_students: 120,
        m_teachers: 8,
        ..PoolConfig::unstructured(seed)
    };
    Pool::generate(&cfg, &mut rng_for(seed, &[])).unwrap()
}

fn curve() -> repteach::curves::CurveTable {
    let mut cfg = SweepConfig::classroom_default(5);
    cfg.seeds_per_point = 3;
    cfg.label_structures = vec![Labeling::Rows];
    build_classroom_curve(&GridSpec::new(6, Labeling::Rows).unwrap(), &cfg)
        .unwrap()
        .pooled
}

#[test]
fn optimal_dominates_every_method_on_shared_seeds() {
    let curve = curve();
    for seed in 0..3 {
        let pool = small_pool(seed);
        let eval = EvalSeeds::new(seed + 100, 5).unwrap();
        let best = mean(&realize_outcomes(&pool, &match_optimal(&pool, eval).unwrap(), eval).unwrap());
        for a in [
            match_random(&pool, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap(),
            match_mooc(&pool).unwrap(),
            match_ours(&pool, &curve).unwrap(),
        ] {
            let acc = mean(&realize_outcomes(&pool, &a, eval).unwrap());
            assert!(best >= acc - 1e-12, "{:?}: {acc} > optimal {best}", a.method);
        }
    }
}

#[test]
fn optimal_realises_the_dyadic_row_maxima() {
    let pool = small_pool(9);
    let eval = EvalSeeds::new(1, 4).unwrap();
    let matrix = dyadic_matrix(&pool, eval).unwrap();
    let realized = realize_outcomes(&pool, &match_optimal(&pool, eval).unwrap(), eval).unwrap();
    for (row, got) in matrix.iter().zip(&realized) {
        let max = row.iter().copied().fold(f64::MIN, f64::max);
        assert_eq!(*got, max);
    }
}

#[test]
fn ours_equals_mooc_when_teachers_share_one_representation() {
    let mut pool = small_pool(4);
    let shared = pool.teachers[0].config.representation.clone();
    for t in &mut pool.teachers {
        t.config.representation = shared.clone();
    }
    // a curve that strictly decreases with error at every alignment
    let mut table = CurveTable::empty(curve().provenance);
    for a in 0..table.alignment_buckets() {
        for e in 0..table.error_buckets() {
            let mean = 0.5 + 0.2 * table.alignment_edges()[a] - 0.04 * e as f64;
            table.set_cell(a, e, Cell { mean, count: 1 });
        }
    }
    let ours = match_ours(&pool, &table).unwrap();
    let mooc = match_mooc(&pool).unwrap();
    let bucket_of = |t: usize| error_bucket(pool.teachers[t].config.error_rate);
    for (&o, &m) in ours.teacher_of.iter().zip(&mooc.teacher_of) {
        assert_eq!(bucket_of(o), bucket_of(m));
    }
}

#[test]
fn matching_runs_are_reproducible() {
    let exp = MatchingExperiment {
        pool: PoolConfig {
            n_students: 80,
            m_teachers: 6,
            ..PoolConfig::unstructured(0)
        },
        methods: Method::ALL.to_vec(),
        pools: 3,
        episodes: 3,
        pass_threshold: 0.45,
        master_seed: 12,
    };
    let c = curve();
    let a = run_matching(&exp, Some(&c)).unwrap();
    let b = run_matching(&exp, Some(&c)).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.assignments, b.assignments);
}

#[test]
fn simulated_participants_reproduce_simulator_accuracy() {
    let kinds = [(StimulusKind::SimpleFeatures, 6), (StimulusKind::SalientDinos, 7)];
    let conds = export_conditions(
        &kinds,
        &[Labeling::Columns, Labeling::Quadrants],
        6,
        &mut ChaCha8Rng::seed_from_u64(8),
    )
    .unwrap();
    // through the JSON schema, as the web task would see them
    let conds: Vec<ConditionFile> = conds
        .iter()
        .map(|c| serde_json::from_str(&serde_json::to_string(c).unwrap()).unwrap())
        .collect();
    let responses = conds
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let r = simulate_1nn_participant(c, &format!("sim{i}")).unwrap();
            let r: ResponseFile = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
            (format!("{i}.json"), Ok(r))
        })
        .collect();
    let report = ingest_responses(&conds, responses).unwrap();
    assert!(report.rejected.is_empty());
    for (c, p) in conds.iter().zip(&report.participants) {
        let truth = c.true_labels().unwrap();
        let direct = score_1nn(&Representation::identity(c.spec.n), &c.revealed.items, truth.as_slice());
        assert_eq!(p.accuracy, direct, "{}", c.condition_id);
    }
    // aligned teachers teach canonical students perfectly
    for s in report.conditions.iter().filter(|s| s.teacher_alignment > 1.0 - 1e-9) {
        assert_eq!(s.mean_accuracy, 1.0, "{}", s.condition_id);
    }
}
