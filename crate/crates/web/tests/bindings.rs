use repteach_web::{corrupt_view, curve_view, episode_view};

#[test]
fn zero_corruption_is_perfectly_aligned() {
    let v = corrupt_view(6, 0.0, 3).unwrap();
    assert!((v.alignment - 1.0).abs() < 1e-12);
    assert!(v.displaced.is_empty());
    assert_eq!(v.placement.len(), 36);
}

#[test]
fn corruption_moves_cells_and_lowers_alignment() {
    let v = corrupt_view(6, 0.5, 3).unwrap();
    assert!(!v.displaced.is_empty());
    assert!(v.alignment < 1.0);
}

#[test]
fn aligned_exact_teacher_episode_is_perfect() {
    for labeling in ["columns", "quadrants", "rows"] {
        let e = episode_view(6, labeling, 0.0, 0.0, 1).unwrap();
        assert_eq!(e.accuracy, 1.0, "{labeling}");
        assert_eq!(e.revealed.len(), e.k);
        assert!(e.revealed.iter().all(|&(s, _)| e.predictions[s].is_none()));
    }
}

#[test]
fn episodes_are_reproducible() {
    let a = serde_json::to_string(&episode_view(7, "quad", 0.3, 0.2, 9).unwrap()).unwrap();
    let b = serde_json::to_string(&episode_view(7, "quad", 0.3, 0.2, 9).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn curve_is_small_enough_for_the_page() {
    let c = curve_view(5, "columns", 2, 0).unwrap();
    assert_eq!(c.episodes, 10 * 21 * 2);
    let top = c
        .cells
        .iter()
        .find(|cell| cell.error_lo == 0.0 && cell.alignment_lo > 0.85)
        .unwrap();
    assert!(top.mean > 0.8);
}

#[test]
fn bad_inputs_are_reported() {
    assert!(episode_view(6, "diagonal", 0.0, 0.0, 0).is_err());
    assert!(corrupt_view(40, 0.1, 0).is_err());
    assert!(corrupt_view(6, 1.5, 0).is_err());
}
