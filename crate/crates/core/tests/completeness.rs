//! The search engine against brute force over all vertex permutations, on a
//! host small enough to enumerate.

use halfspin::apartments::{apartment_of, random_frame, standard_frame, Level};
use halfspin::embeddings::{search_embeddings, Kind, Pattern, SearchConfig, TableHost};
use halfspin::graphcore::{all_pairs_distances, build_halfcube, DistanceMatrix};
use halfspin::grassmann::{PolarGeometry, Sign};

fn permutations(n: usize, f: &mut impl FnMut(&[usize])) {
    fn go(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == p.len() {
            f(p);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            go(p, k + 1, f);
            p.swap(k, i);
        }
    }
    go(&mut (0..n).collect(), 0, f);
}

fn brute_force(pat: &DistanceMatrix, host: &DistanceMatrix, kind: Kind) -> usize {
    let n = pat.order();
    let mut count = 0;
    permutations(n, &mut |p| {
        let ok = (0..n).all(|i| (i + 1..n).all(|j| kind.class(pat.get(i, j)) == kind.class(host.get(p[i], p[j]))));
        count += ok as usize;
    });
    count
}

fn apartment_host(geo: &PolarGeometry, sign: Sign, seed: Option<u64>) -> DistanceMatrix {
    let frame = match seed {
        Some(s) => random_frame(geo.model(), s),
        None => standard_frame(geo.form().rank()).unwrap(),
    };
    let ap = apartment_of(geo, &frame, Level::HalfSpin(sign)).unwrap();
    let members = ap.members.clone();
    DistanceMatrix::from_fn(members.len(), move |i, j| geo.halfspin_distance(sign, members[i], members[j]))
}

#[test]
fn engine_finds_every_map_into_an_apartment() {
    let geo = PolarGeometry::new(4).unwrap();
    let pat_g = build_halfcube(4).unwrap();
    let pat_dm = all_pairs_distances(&pat_g).unwrap();
    for (sign, seed) in [(Sign::Plus, None), (Sign::Minus, Some(3)), (Sign::Plus, Some(11))] {
        let host_dm = apartment_host(&geo, sign, seed);
        assert_eq!(host_dm.order(), 8);
        let host = TableHost::new(host_dm.clone());
        for kind in [Kind::Isometric, Kind::Weak] {
            let want = brute_force(&pat_dm, &host_dm, kind);
            let (maps, stats) = search_embeddings(&Pattern::new(&pat_g).unwrap(), &host, &SearchConfig::exhaustive(kind));
            assert!(stats.complete);
            assert_eq!(maps.len(), want, "{sign:?} {seed:?} {kind:?}");
            assert_eq!(want, 384);

            let broken = Pattern::new(&pat_g).unwrap().with_symmetry_breaking();
            let (reps, _) = search_embeddings(&broken, &host, &SearchConfig::exhaustive(kind).symmetric(true));
            assert_eq!(reps.len() as u64 * broken.automorphism_count().unwrap(), want as u64);
        }
    }
}
