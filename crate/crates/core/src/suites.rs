//! Batch checks of the structural lemmas on the finite models: axioms and
//! orthogonality, half-spin cliques and lines, and the half-cube lemmas.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::graphcore::{
    all_pairs_distances, build_halfcube, classify_halfcube_clique, enumerate_maximal_cliques, geodesic_cover_check,
    halfcube_index, halfcube_word, separating_vertex, FiniteGraph, HalfcubeCliqueType, DEFAULT_CLIQUE_LIMIT,
};
use crate::grassmann::{
    build_halfspin_graph, clique_census, clique_intersection_type, line_closure_check, CliqueCensus, CliqueKind,
    IntersectionType, LineClosureReport, PolarGeometry, Sign,
};
use crate::quadric::{AxiomReport, PolarSpaceModel};
use crate::Result;

/// Counts of one randomized implication: instances drawn, instances where the
/// hypothesis held, and failures.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ImplicationTally {
    pub instances: u64,
    pub hypothesis_held: u64,
    pub failures: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomSuiteReport {
    pub n: usize,
    pub axioms: AxiomReport,
    pub seed: u64,
    /// `p` orthogonal to a point set implies `p` orthogonal to its span.
    pub perp_span: ImplicationTally,
    /// `p` orthogonal to a generator implies `p` lies in it.
    pub perp_generator: ImplicationTally,
    pub passed: bool,
}

/// The exhaustive axiom check plus `instances` seeded orthogonality instances
/// of each kind. Half of the instances are drawn so that the hypothesis holds.
pub fn axiom_suite(n: usize, instances: usize, seed: u64) -> Result<AxiomSuiteReport> {
    let model = PolarSpaceModel::hyperbolic(n)?;
    let axioms = crate::quadric::verify_bs_axioms(&model)?;
    let gens = model.generators()?;
    let pts = model.points();
    let form = model.form();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut span = ImplicationTally::default();
    let mut gen = ImplicationTally::default();
    for i in 0..instances {
        let p = *pts.choose(&mut rng).unwrap();
        let perp: Vec<u32> = pts.iter().copied().filter(|&x| !form.b(p, x)).collect();
        let pool = if i % 2 == 0 { &perp } else { pts };
        let k = rng.gen_range(1..=3.min(pool.len()));
        let xs: Vec<u32> = pool.choose_multiple(&mut rng, k).copied().collect();
        span.instances += 1;
        span.hypothesis_held += xs.iter().all(|&x| !form.b(p, x)) as u64;
        span.failures += !model.perp_tests(p, &xs).0 as u64;

        let s = gens.choose(&mut rng).unwrap();
        let q = if i % 2 == 0 {
            let sp = model.perp_points(s.rows());
            *sp.choose(&mut rng).unwrap_or(&p)
        } else {
            p
        };
        gen.instances += 1;
        gen.hypothesis_held += s.rows().iter().all(|&r| !form.b(q, r)) as u64;
        gen.failures += !model.perp_tests(q, s.rows()).1 as u64;
    }
    Ok(AxiomSuiteReport {
        n,
        passed: axioms.passed && span.failures == 0 && gen.failures == 0,
        axioms,
        seed,
        perp_span: span,
        perp_generator: gen,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CliqueSuiteReport {
    pub n: usize,
    pub sign: Sign,
    pub census: CliqueCensus,
    pub clique_pairs: u64,
    /// Intersection type name -> number of clique pairs.
    pub intersection_types: BTreeMap<String, u64>,
    /// Pairs whose intersection is not empty, a point, a line or a plane.
    pub other_intersections: u64,
    /// Plane intersections that are not a star inside a special subspace, plus
    /// such star/special pairs whose intersection is not a plane.
    pub plane_rule_violations: u64,
    pub line_closure: LineClosureReport,
    pub passed: bool,
}

/// Maximal cliques of one half-spin graph, pairwise intersections, and the
/// closure of common neighbourhoods under lines.
pub fn clique_suite(geo: &PolarGeometry, sign: Sign) -> Result<CliqueSuiteReport> {
    let hs = build_halfspin_graph(geo, sign)?;
    let census = clique_census(geo, &hs)?;
    let cl = &census.cliques;
    let pairs: Vec<(usize, usize)> = (0..cl.len()).flat_map(|i| (i + 1..cl.len()).map(move |j| (i, j))).collect();
    let types: Vec<(IntersectionType, bool)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let t = clique_intersection_type(geo, &cl[i], &cl[j])?;
            let nested = match (&cl[i].kind, &cl[j].kind) {
                (CliqueKind::Star { m }, CliqueKind::Special { u }) | (CliqueKind::Special { u }, CliqueKind::Star { m }) => {
                    u.contains_subspace(m)
                }
                _ => false,
            };
            Ok((t, nested))
        })
        .collect::<Result<_>>()?;
    let mut hist: BTreeMap<String, u64> = BTreeMap::new();
    let mut other = 0;
    let mut plane_bad = 0;
    for &(t, nested) in &types {
        let name = match t {
            IntersectionType::Empty => "empty".to_string(),
            IntersectionType::Point => "point".to_string(),
            IntersectionType::Line => "line".to_string(),
            IntersectionType::Plane => "plane".to_string(),
            IntersectionType::Other(k) => {
                other += 1;
                format!("other({k})")
            }
        };
        *hist.entry(name).or_default() += 1;
        if (t == IntersectionType::Plane) != nested {
            plane_bad += 1;
        }
    }
    let line_closure = line_closure_check(geo, &hs)?;
    let passed = census.all_classified
        && census.matches_generated
        && other == 0
        && plane_bad == 0
        && line_closure.violations == 0;
    Ok(CliqueSuiteReport {
        n: geo.n(),
        sign,
        clique_pairs: pairs.len() as u64,
        census,
        intersection_types: hist,
        other_intersections: other,
        plane_rule_violations: plane_bad,
        line_closure,
        passed,
    })
}

/// Checked instances and failures of one lemma.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LemmaTally {
    pub checked: u64,
    pub failures: u64,
}

impl LemmaTally {
    fn record(&mut self, ok: bool) {
        self.checked += 1;
        self.failures += !ok as u64;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HalfcubeLemmaReport {
    pub m: usize,
    pub mode: &'static str,
    pub seed: Option<u64>,
    pub vertices: usize,
    pub maximal_cliques: Option<usize>,
    /// Every vertex lies on a geodesic between opposite vertices (even `m` only).
    pub geodesic_cover: Option<LemmaTally>,
    /// For a triangle `v, w, u` some vertex is adjacent to `v, w` and not to `u`.
    pub triangle_separation: LemmaTally,
    /// Two distinct maximal cliques share at most three vertices; three only
    /// for a star and a special subset, which otherwise share 0 or 1.
    pub clique_pairs: LemmaTally,
    pub max_clique_intersection: usize,
    /// Every triangle lies in exactly one star and one special subset.
    pub triangle_cliques: LemmaTally,
    /// For a 4-clique `v, w, u, s` some vertex is adjacent to `v, w, u` and not to `s`.
    pub quadruple_separation: LemmaTally,
    pub passed: bool,
}

impl HalfcubeLemmaReport {
    fn finish(mut self) -> Self {
        self.passed = self.geodesic_cover.is_none_or(|t| t.failures == 0 && t.checked > 0)
            && [self.triangle_separation, self.clique_pairs, self.triangle_cliques, self.quadruple_separation]
                .iter()
                .all(|t| t.failures == 0 && t.checked > 0);
        self
    }
}

fn words_of(m: usize, c: &HalfcubeCliqueType) -> Vec<usize> {
    c.members(m).into_iter().map(|w| halfcube_index(w) as usize).collect()
}

fn intersection_ok(m: usize, a: &HalfcubeCliqueType, b: &HalfcubeCliqueType) -> (bool, usize) {
    let wa = a.members(m);
    let wb = b.members(m);
    let k = wa.iter().filter(|w| wb.contains(w)).count();
    let mixed = a.is_star() != b.is_star();
    (k <= 3 && (k != 3 || mixed) && (!mixed || k != 2), k)
}

/// Stars and special subsets containing every word of `words`.
fn cliques_through(m: usize, words: &[u32]) -> (usize, usize) {
    let full = (1u32 << m) - 1;
    let v = words[0];
    let mut stars = 0;
    for free in 0..=full {
        if free.count_ones() != 3 {
            continue;
        }
        let mask = full & !free;
        if words.iter().all(|&w| w & mask == v & mask) {
            stars += 1;
        }
    }
    let specials = (0..m)
        .filter(|&i| {
            let c = v ^ (1 << i);
            words.iter().all(|&w| (w ^ c).count_ones() == 1)
        })
        .count();
    (stars, specials)
}

/// Exhaustive check of the half-cube lemmas on `½H_m`.
pub fn halfcube_lemmas_exhaustive(m: usize) -> Result<HalfcubeLemmaReport> {
    let g = build_halfcube(m)?;
    let dm = all_pairs_distances(&g)?;
    let nv = g.vertex_count();
    let word = |v: usize| halfcube_word(v as u32);
    let geodesic_cover = (m % 2 == 0).then(|| {
        let mut t = LemmaTally::default();
        for (v, w) in dm.opposite_pairs() {
            t.record(geodesic_cover_check(&g, &dm, v, w).unwrap_or(false));
        }
        t
    });
    let cliques = enumerate_maximal_cliques(&g, DEFAULT_CLIQUE_LIMIT)?;
    let types: Vec<HalfcubeCliqueType> = cliques
        .iter()
        .map(|c| classify_halfcube_clique(m, &c.iter().map(|&v| word(v)).collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    let mut pairs = LemmaTally::default();
    let mut max_k = 0;
    for i in 0..types.len() {
        for j in i + 1..types.len() {
            let (ok, k) = intersection_ok(m, &types[i], &types[j]);
            pairs.record(ok);
            max_k = max_k.max(k);
        }
    }
    let mut tri_sep = LemmaTally::default();
    let mut tri_cl = LemmaTally::default();
    let mut quad_sep = LemmaTally::default();
    for v in 0..nv {
        for &w in g.neighbors(v).iter().filter(|&&w| w as usize > v) {
            let w = w as usize;
            for &u in g.neighbors(w).iter().filter(|&&u| u as usize > w && g.is_adjacent(u as usize, v)) {
                let u = u as usize;
                let (s, sp) = cliques_through(m, &[word(v), word(w), word(u)]);
                tri_cl.record(s == 1 && sp == 1);
                for (a, b, c) in [(v, w, u), (v, u, w), (w, u, v)] {
                    tri_sep.record(separating_vertex(&g, &[a, b], c)?.is_some());
                }
                for &s in g.neighbors(u).iter().filter(|&&s| {
                    let s = s as usize;
                    s > u && g.is_adjacent(s, v) && g.is_adjacent(s, w)
                }) {
                    let q = [v, w, u, s as usize];
                    for k in 0..4 {
                        let rest: Vec<usize> = (0..4).filter(|&i| i != k).map(|i| q[i]).collect();
                        quad_sep.record(separating_vertex(&g, &rest, q[k])?.is_some());
                    }
                }
            }
        }
    }
    Ok(HalfcubeLemmaReport {
        m,
        mode: "exhaustive",
        seed: None,
        vertices: nv,
        maximal_cliques: Some(types.len()),
        geodesic_cover,
        triangle_separation: tri_sep,
        clique_pairs: pairs,
        max_clique_intersection: max_k,
        triangle_cliques: tri_cl,
        quadruple_separation: quad_sep,
        passed: false,
    }
    .finish())
}

fn random_neighbor(g: &FiniteGraph, rng: &mut ChaCha8Rng, of: &[usize]) -> Option<usize> {
    let cands: Vec<usize> = g
        .neighbors(of[0])
        .iter()
        .map(|&x| x as usize)
        .filter(|&x| of[1..].iter().all(|&y| y != x && g.is_adjacent(x, y)))
        .collect();
    cands.choose(rng).copied()
}

/// Maximal cliques through the vertex with word `v`.
fn cliques_at(m: usize, v: u32) -> Vec<HalfcubeCliqueType> {
    let full = (1u32 << m) - 1;
    let mut out: Vec<HalfcubeCliqueType> = (0..=full)
        .filter(|f| f.count_ones() == 3)
        .map(|free| HalfcubeCliqueType::Star {
            fixed_mask: full & !free,
            fixed_values: v & full & !free,
        })
        .collect();
    out.extend((0..m).map(|i| HalfcubeCliqueType::SpecialSubset { center: v ^ (1 << i) }));
    out
}

/// `instances` seeded instances of each half-cube lemma on `½H_m`.
pub fn halfcube_lemmas_sampled(m: usize, instances: usize, seed: u64) -> Result<HalfcubeLemmaReport> {
    let g = build_halfcube(m)?;
    let dm = all_pairs_distances(&g)?;
    let nv = g.vertex_count();
    let word = |v: usize| halfcube_word(v as u32);
    let full = (1u32 << m) - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cover = (m % 2 == 0).then(LemmaTally::default);
    let mut tri_sep = LemmaTally::default();
    let mut tri_cl = LemmaTally::default();
    let mut quad_sep = LemmaTally::default();
    let mut pairs = LemmaTally::default();
    let mut max_k = 0;
    for _ in 0..instances {
        let v = rng.gen_range(0..nv);
        if let Some(t) = cover.as_mut() {
            let opp = halfcube_index(word(v) ^ full) as usize;
            t.record(geodesic_cover_check(&g, &dm, v, opp)?);
        }
        let w = random_neighbor(&g, &mut rng, &[v]).expect("half-cubes have edges");
        let u = random_neighbor(&g, &mut rng, &[v, w]).expect("every edge lies in a triangle");
        tri_sep.record(separating_vertex(&g, &[v, w], u)?.is_some());
        let (s, sp) = cliques_through(m, &[word(v), word(w), word(u)]);
        tri_cl.record(s == 1 && sp == 1);
        let s = random_neighbor(&g, &mut rng, &[v, w, u]).expect("every triangle lies in a 4-clique");
        quad_sep.record(separating_vertex(&g, &[v, w, u], s)?.is_some());
        let at = cliques_at(m, word(v));
        let two: Vec<&HalfcubeCliqueType> = at.choose_multiple(&mut rng, 2).collect();
        let (ok, k) = intersection_ok(m, two[0], two[1]);
        pairs.record(ok);
        max_k = max_k.max(k);
        debug_assert!(words_of(m, two[0]).contains(&v));
    }
    Ok(HalfcubeLemmaReport {
        m,
        mode: "sampled",
        seed: Some(seed),
        vertices: nv,
        maximal_cliques: None,
        geodesic_cover: cover,
        triangle_separation: tri_sep,
        clique_pairs: pairs,
        max_clique_intersection: max_k,
        triangle_cliques: tri_cl,
        quadruple_separation: quad_sep,
        passed: false,
    }
    .finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cliques_through_a_triangle() {
        // 0000, 0011, 0101: star fixing the first coordinate, special around 0001
        assert_eq!(cliques_through(4, &[0b0000, 0b0011, 0b0101]), (1, 1));
        assert_eq!(cliques_at(4, 0).len(), 8);
    }

    #[test]
    fn small_suites_pass() {
        let r4 = halfcube_lemmas_exhaustive(4).unwrap();
        assert!(r4.passed, "{r4:?}");
        let r = halfcube_lemmas_sampled(8, 50, 1).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(axiom_suite(2, 50, 3).unwrap().passed);
    }
}
