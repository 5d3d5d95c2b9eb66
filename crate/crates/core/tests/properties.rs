use std::sync::OnceLock;

use proptest::prelude::*;

use halfspin::apartments::{apartment_of, random_frame, recognize_apartment, Level, Verdict};
use halfspin::graphcore::{all_pairs_distances, build_halfcube, build_hypercube, halfcube_word, DistanceMatrix};
use halfspin::grassmann::{build_halfspin_graph, PolarGeometry, Sign};
use halfspin::quadric::{PolarSpaceModel, Route, SingularSubspace};

fn geo(n: usize) -> &'static PolarGeometry {
    static G: [OnceLock<PolarGeometry>; 6] = [const { OnceLock::new() }; 6];
    G[n].get_or_init(|| PolarGeometry::new(n).unwrap())
}

fn halfcube_dm(m: usize) -> &'static DistanceMatrix {
    static D: [OnceLock<DistanceMatrix>; 11] = [const { OnceLock::new() }; 11];
    D[m].get_or_init(|| all_pairs_distances(&build_halfcube(m).unwrap()).unwrap())
}

fn hypercube_dm(m: usize) -> &'static DistanceMatrix {
    static D: [OnceLock<DistanceMatrix>; 11] = [const { OnceLock::new() }; 11];
    D[m].get_or_init(|| all_pairs_distances(&build_hypercube(m).unwrap()).unwrap())
}

fn halfspin5() -> &'static DistanceMatrix {
    static D: OnceLock<DistanceMatrix> = OnceLock::new();
    D.get_or_init(|| build_halfspin_graph(geo(5), Sign::Plus).unwrap().dm)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn halfcube_distance_is_half_hamming(m in 4usize..=10, a in any::<u32>(), b in any::<u32>()) {
        let k = 1u32 << (m - 1);
        let (i, j) = (a % k, b % k);
        let d = (halfcube_word(i) ^ halfcube_word(j)).count_ones() / 2;
        prop_assert_eq!(halfcube_dm(m).get(i as usize, j as usize), d);
    }

    #[test]
    fn hypercube_distance_is_hamming(m in 1usize..=10, a in any::<u32>(), b in any::<u32>()) {
        let k = 1u32 << m;
        let (x, y) = (a % k, b % k);
        prop_assert_eq!(hypercube_dm(m).get(x as usize, y as usize), (x ^ y).count_ones());
    }

    #[test]
    fn canonical_form_is_idempotent(n in 2usize..=5, g in any::<usize>(), mask in any::<u32>()) {
        let geo = geo(n);
        let s = geo.generator(g % geo.generators().len());
        let pts: Vec<u32> = s.points().into_iter().enumerate().filter(|(i, _)| mask >> (i % 32) & 1 == 1).map(|x| x.1).collect();
        let t = SingularSubspace::span(geo.form(), &pts).unwrap();
        let again = SingularSubspace::from_canonical(n, t.rows()).unwrap();
        prop_assert_eq!(again, t);
        let shuffled: Vec<u32> = t.rows().iter().rev().copied().collect();
        prop_assert_eq!(SingularSubspace::span(geo.form(), &shuffled).unwrap(), t);
        prop_assert!(s.contains_subspace(&t));
    }

    #[test]
    fn orthogonal_points_span_singular_lines(n in 2usize..=5, a in any::<usize>(), b in any::<usize>()) {
        let model = geo(n).model();
        let pts = model.points();
        let (p, q) = (pts[a % pts.len()], pts[b % pts.len()]);
        if p != q && !model.form().b(p, q) {
            prop_assert!(!model.form().q(p ^ q));
            prop_assert!(model.point_index(p ^ q).is_some());
        }
    }

    #[test]
    fn halfspin_formula_matches_bfs(a in any::<usize>(), b in any::<usize>()) {
        let geo = geo(5);
        let k = geo.family(Sign::Plus).len();
        let (u, v) = (a % k, b % k);
        prop_assert_eq!(halfspin5().get(u, v), geo.halfspin_distance(Sign::Plus, u, v));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn apartments_round_trip(n in 4usize..=5, seed in any::<u64>(), minus in any::<bool>()) {
        let geo = geo(n);
        let sign = if minus { Sign::Minus } else { Sign::Plus };
        let frame = random_frame(geo.model(), seed);
        let ap = apartment_of(geo, &frame, Level::HalfSpin(sign)).unwrap();
        prop_assert_eq!(ap.members.len(), 1 << (n - 1));
        let v = recognize_apartment(geo, sign, &ap.members).unwrap();
        if n % 2 == 1 {
            // odd rank is outside the recognizer's range
            prop_assert!(matches!(&v, Verdict::NotApartment(why) if why.contains("parity")));
            return Ok(());
        }
        let r = v.recognized().expect("apartment recognized");
        prop_assert_eq!(r.m.vdim(), 0);
        let regen = r.regenerate(geo.form(), Some(sign)).unwrap();
        let mut want: Vec<SingularSubspace> = ap.members.iter().map(|&x| *geo.member(sign, x)).collect();
        want.sort_unstable();
        prop_assert_eq!(regen, want);
        // every frame point lies in 2^(n-2) members
        for &p in &frame.points {
            let c = ap.members.iter().filter(|&&x| geo.member(sign, x).contains(p)).count();
            prop_assert_eq!(c, 1 << (n - 2));
        }
    }
}

#[test]
fn routes_agree_in_small_rank() {
    for n in [2, 3] {
        let model = PolarSpaceModel::hyperbolic(n).unwrap();
        for k in -1..n as i32 {
            let a = model.enumerate_with(k, Route::Extension).unwrap();
            let b = model.enumerate_with(k, Route::BruteForce).unwrap();
            assert_eq!(a, b, "n = {n}, k = {k}");
        }
    }
}

#[test]
fn point_counts_match_formula() {
    for n in 2..=5usize {
        let want = ((1usize << n) - 1) * ((1usize << (n - 1)) + 1);
        let model = PolarSpaceModel::hyperbolic(n).unwrap();
        assert_eq!(model.points().len(), want);
        assert_eq!(model.enumerate_with(0, Route::BruteForce).unwrap().len(), want);
    }
}

#[test]
fn family_parity_law() {
    let geo = geo(4);
    for a in 0..geo.generators().len() {
        for b in 0..geo.generators().len() {
            let d = geo.dual_distance(geo.generator(a), geo.generator(b));
            assert_eq!(d % 2 == 0, geo.sign(a) == geo.sign(b));
        }
    }
}
