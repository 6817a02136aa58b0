use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use repteach::agents::{flip_labels, score_1nn, select_self_centered, BeliefLabels, TeacherConfig, TeacherKind};
use repteach::curves::{CurveKind, CurveTable, Episode, Provenance};
use repteach::grid::{
    alignment, corrupt_representation, true_labels, DistanceProfile, GridSpec, Labeling, Representation,
};
use repteach::matching::report;
use repteach::seeds::derive_seed;

fn labeling() -> impl Strategy<Value = Labeling> {
    prop_oneof![Just(Labeling::Columns), Just(Labeling::Rows), Just(Labeling::Quadrants)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn corruption_keeps_a_bijection(n in 2usize..9, c in 0.0f64..=1.0, seed: u64) {
        let base = Representation::identity(n);
        let rep = corrupt_representation(&base, c, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let mut cells: Vec<[u32; 2]> = rep.placement().to_vec();
        cells.sort();
        cells.dedup();
        prop_assert_eq!(cells.len(), n * n);
        prop_assert!(Representation::from_placement(n, rep.placement().to_vec()).is_ok());
    }

    #[test]
    fn alignment_is_symmetric_and_bounded(n in 3usize..8, c1 in 0.0f64..=1.0, c2 in 0.0f64..=1.0, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = Representation::identity(n);
        let a = corrupt_representation(&base, c1, &mut rng).unwrap();
        let b = corrupt_representation(&base, c2, &mut rng).unwrap();
        let (ab, ba) = match (alignment(&a, &b), alignment(&b, &a)) {
            (Ok(x), Ok(y)) => (x, y),
            _ => return Ok(()),
        };
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&ab));
        let fast = DistanceProfile::new(&a).unwrap().alignment(&DistanceProfile::new(&b).unwrap()).unwrap();
        prop_assert!((fast - ab).abs() < 1e-9);
        prop_assert!((alignment(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_error_changes_every_label(n in 2usize..8, l in labeling(), seed: u64) {
        let truth = true_labels(&GridSpec::new(n, l).unwrap()).unwrap();
        let flipped = flip_labels(truth.as_slice(), truth.k(), 1.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(flipped.iter().zip(truth.as_slice()).all(|(a, b)| a != b));
        prop_assert!(flipped.iter().all(|&x| (x as usize) < truth.k()));
        let same = flip_labels(truth.as_slice(), truth.k(), 0.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(same.as_slice(), truth.as_slice());
    }

    #[test]
    fn aligned_exact_teacher_is_perfect(n in 2usize..10, l in labeling()) {
        let truth = true_labels(&GridSpec::new(n, l).unwrap()).unwrap();
        let teacher = TeacherConfig::new(Representation::identity(n), 0.0, TeacherKind::SelfCentered).unwrap();
        let sel = select_self_centered(&teacher, &BeliefLabels::exact(&truth)).unwrap();
        prop_assert_eq!(sel.set.len(), truth.k());
        let acc = score_1nn(&Representation::identity(n), &sel.set.items, truth.as_slice());
        // a 2×2 quadrant grid reveals every stimulus, leaving nothing to score
        if n * n > truth.k() {
            prop_assert_eq!(acc, 1.0);
        }
    }

    #[test]
    fn reports_ignore_input_order(mut accs in prop::collection::vec(0.0f64..=1.0, 1..200), seed: u64) {
        let a = report(&accs, 0.45).unwrap();
        use rand::seq::SliceRandom;
        accs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let b = report(&accs, 0.45).unwrap();
        prop_assert!((a.avg_accuracy - b.avg_accuracy).abs() < 1e-12);
        prop_assert_eq!(a.bottom_decile_mean, b.bottom_decile_mean);
        prop_assert_eq!(a.top_decile_mean, b.top_decile_mean);
        prop_assert_eq!(a.pass_rate, b.pass_rate);
        prop_assert!(a.bottom_decile_mean <= a.avg_accuracy + 1e-12);
        prop_assert!(a.avg_accuracy <= a.top_decile_mean + 1e-12);
    }

    #[test]
    fn seed_derivation_is_a_pure_function(master: u64, path in prop::collection::vec(any::<u64>(), 0..5)) {
        prop_assert_eq!(derive_seed(master, &path), derive_seed(master, &path));
        let mut longer = path.clone();
        longer.push(0);
        prop_assert_ne!(derive_seed(master, &path), derive_seed(master, &longer));
    }

    #[test]
    fn curve_csv_round_trips(eps in prop::collection::vec((-1.0f64..=1.0, 0.0f64..=0.99, 0.0f64..=1.0), 1..100)) {
        let prov = Provenance {
            kind: CurveKind::Dyadic,
            grid_size: 6,
            label_structures: vec![Labeling::Columns],
            master_seed: 0,
            episodes: eps.len() as u64,
        };
        let episodes: Vec<Episode> = eps
            .iter()
            .map(|&(alignment, error_rate, accuracy)| Episode { structure: 0, alignment, error_rate, accuracy })
            .collect();
        let table = CurveTable::from_episodes(prov.clone(), &episodes);
        let back = CurveTable::from_csv(&table.to_csv(), prov).unwrap();
        prop_assert_eq!(back, table);
    }
}
