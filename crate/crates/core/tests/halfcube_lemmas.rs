use halfspin::suites::{halfcube_lemmas_exhaustive, halfcube_lemmas_sampled};

#[test]
fn lemmas_hold_exhaustively_in_small_rank() {
    for m in [4, 5, 6] {
        let r = halfcube_lemmas_exhaustive(m).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.max_clique_intersection, 3);
        assert_eq!(r.geodesic_cover.is_some(), m % 2 == 0);
    }
}

#[test]
fn sampled_lemmas_are_reproducible() {
    let a = halfcube_lemmas_sampled(8, 500, 9).unwrap();
    let b = halfcube_lemmas_sampled(8, 500, 9).unwrap();
    assert!(a.passed, "{a:?}");
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}
