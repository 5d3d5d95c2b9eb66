use serde::Serialize;

use crate::graphcore::{
    build_halfcube, classify_halfcube_clique, enumerate_maximal_cliques, halfcube_word, HalfcubeCliqueType,
    DEFAULT_CLIQUE_LIMIT,
};
use crate::grassmann::{
    generators_through, is_independent, special_of, star_of, CliqueClassification, PolarGeometry, Sign,
};
use crate::quadric::SingularSubspace;
use crate::{Error, Result};

/// A maximal clique of `½H_m` with its type and member indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PatternClique {
    pub kind: HalfcubeCliqueType,
    pub members: Vec<u32>,
}

/// Maximal cliques of `½H_m`, `m >= 4`, in the order of the clique enumeration.
pub fn halfcube_cliques(m: usize) -> Result<Vec<PatternClique>> {
    if m < 4 {
        return Err(Error::Precondition(format!("clique types need m >= 4, got {m}")));
    }
    let g = build_halfcube(m)?;
    enumerate_maximal_cliques(&g, DEFAULT_CLIQUE_LIMIT)?
        .into_iter()
        .map(|c| {
            let words: Vec<u32> = c.iter().map(|&i| halfcube_word(i as u32)).collect();
            Ok(PatternClique {
                kind: classify_halfcube_clique(m, &words)?,
                members: c.iter().map(|&i| i as u32).collect(),
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum AbVerdict {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CliqueRow {
    pub pattern: HalfcubeCliqueType,
    pub host: &'static str,
    pub host_members: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ABClass {
    pub verdict: AbVerdict,
    pub table: Vec<CliqueRow>,
}

/// Subspaces of `s` of vector dimension `d`.
fn subspaces_of_vdim(s: &SingularSubspace, d: usize) -> Vec<SingularSubspace> {
    let mut level = vec![*s];
    while level.first().is_some_and(|x| x.vdim() > d) {
        let mut next: Vec<SingularSubspace> = level.iter().flat_map(|x| x.hyperplanes()).collect();
        next.sort_unstable();
        next.dedup();
        level = next;
    }
    level
}

/// The maximal clique of the half-spin graph containing the given pairwise
/// adjacent members, found from subspaces: stars over `(n-4)`-subspaces of
/// the common intersection and specials over opposite generators through
/// the span of the pairwise intersections. Exactly one must exist.
pub fn unique_host_clique(geo: &PolarGeometry, sign: Sign, images: &[usize]) -> Result<CliqueClassification> {
    let n = geo.n();
    if images.len() < 3 {
        return Err(Error::Precondition("need at least three images".into()));
    }
    let subs: Vec<&SingularSubspace> = images.iter().map(|&v| geo.member(sign, v)).collect();
    for (i, a) in subs.iter().enumerate() {
        for b in &subs[i + 1..] {
            if a.meet_vdim(b) != n - 2 {
                return Err(Error::Precondition("images are not pairwise adjacent".into()));
            }
        }
    }
    let common = subs[1..].iter().fold(*subs[0], |acc, s| acc.intersection(s));
    let mut found = Vec::new();
    if common.vdim() + 3 >= n {
        for m in subspaces_of_vdim(&common, n - 3) {
            found.push(star_of(geo, sign, &m)?);
        }
    }
    let mut vecs = Vec::new();
    for (i, a) in subs.iter().enumerate() {
        for b in &subs[i + 1..] {
            vecs.extend_from_slice(a.intersection(b).rows());
        }
    }
    if let Ok(w) = geo.model().span(&vecs) {
        for g in generators_through(geo, &w, Some(sign.opposite()))? {
            let u = geo.generator(g);
            if subs.iter().all(|x| x.meet_vdim(u) == n - 1) {
                found.push(special_of(geo, sign, u)?);
            }
        }
    }
    if found.len() != 1 {
        return Err(Error::Contradiction(format!(
            "{} maximal cliques contain the images {images:?}",
            found.len()
        )));
    }
    Ok(found.pop().unwrap())
}

/// The (A)/(B) type of a weak embedding of `½H_m`, from the host clique of
/// every pattern clique. A mixed table is a contradiction.
pub fn classify_ab(geo: &PolarGeometry, sign: Sign, cliques: &[PatternClique], map: &[u32]) -> Result<ABClass> {
    let mut table = Vec::with_capacity(cliques.len());
    let (mut same, mut swapped) = (0, 0);
    for c in cliques {
        let imgs: Vec<usize> = c.members.iter().map(|&v| map[v as usize] as usize).collect();
        let h = unique_host_clique(geo, sign, &imgs)?;
        if h.kind.is_star() == c.kind.is_star() {
            same += 1;
        } else {
            swapped += 1;
        }
        table.push(CliqueRow {
            pattern: c.kind,
            host: h.kind.name(),
            host_members: h.members,
        });
    }
    let verdict = match (same, swapped) {
        (_, 0) => AbVerdict::A,
        (0, _) => AbVerdict::B,
        _ => {
            return Err(Error::Contradiction(format!(
                "mixed clique table: {same} kept, {swapped} swapped"
            )))
        }
    };
    Ok(ABClass { verdict, table })
}

/// Automorphism of `½H_4` exchanging the antipodal words 0000 and 1111 and
/// fixing the rest; it swaps stars and special subsets.
pub fn type_swap_automorphism_h4() -> Vec<u32> {
    let mut p: Vec<u32> = (0..8).collect();
    p.swap(0, 7);
    p
}

/// Host cliques indexed by vertex, for repeated lookups on a fixed family.
pub struct HostCliqueIndex {
    pub sign: Sign,
    pub cliques: Vec<CliqueClassification>,
    stride: usize,
    rows: Vec<u64>,
}

impl HostCliqueIndex {
    pub const MAX_CLIQUES: usize = 1024;

    pub fn new(sign: Sign, order: usize, cliques: Vec<CliqueClassification>) -> Result<Self> {
        if cliques.len() > Self::MAX_CLIQUES {
            return Err(Error::Budget {
                what: "indexed host cliques".into(),
                needed: cliques.len() as u64,
                limit: Self::MAX_CLIQUES as u64,
            });
        }
        let stride = cliques.len().div_ceil(64);
        let mut rows = vec![0u64; order * stride];
        for (c, cl) in cliques.iter().enumerate() {
            for &v in &cl.members {
                rows[v * stride + c / 64] |= 1 << (c % 64);
            }
        }
        Ok(HostCliqueIndex {
            sign,
            cliques,
            stride,
            rows,
        })
    }

    /// Index of the only clique containing all `vs`, if exactly one does.
    #[inline]
    pub fn lookup(&self, vs: &[u32]) -> Option<usize> {
        let s = self.stride;
        let mut acc = [!0u64; 16];
        let acc = &mut acc[..s];
        for &v in vs {
            let row = &self.rows[v as usize * s..(v as usize + 1) * s];
            acc.iter_mut().zip(row).for_each(|(a, r)| *a &= r);
        }
        let total: u32 = acc.iter().map(|w| w.count_ones()).sum();
        if total != 1 {
            return None;
        }
        acc.iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn is_star(&self, c: usize) -> bool {
        self.cliques[c].kind.is_star()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndependenceReport {
    pub triples: usize,
    pub quadruples: usize,
    pub dependent_triples: usize,
    pub dependent_quadruples: usize,
    pub first_dependent: Option<Vec<u32>>,
}

impl IndependenceReport {
    pub fn passed(&self) -> bool {
        self.dependent_triples == 0 && self.dependent_quadruples == 0
    }
}

/// Images of every 3- and 4-clique of the pattern must be independent in the
/// half-spin space. `adjacent` is pattern adjacency.
pub fn independence_checks(
    geo: &PolarGeometry,
    sign: Sign,
    order: usize,
    adjacent: impl Fn(usize, usize) -> bool,
    map: &[u32],
) -> Result<IndependenceReport> {
    let mut rep = IndependenceReport {
        triples: 0,
        quadruples: 0,
        dependent_triples: 0,
        dependent_quadruples: 0,
        first_dependent: None,
    };
    let img = |vs: &[usize]| -> Vec<usize> { vs.iter().map(|&v| map[v] as usize).collect() };
    for a in 0..order {
        for b in (a + 1..order).filter(|&b| adjacent(a, b)) {
            for c in (b + 1..order).filter(|&c| adjacent(a, c) && adjacent(b, c)) {
                rep.triples += 1;
                if !is_independent(geo, sign, &img(&[a, b, c]))? {
                    rep.dependent_triples += 1;
                    rep.first_dependent.get_or_insert(vec![a as u32, b as u32, c as u32]);
                }
                for d in (c + 1..order).filter(|&d| adjacent(a, d) && adjacent(b, d) && adjacent(c, d)) {
                    rep.quadruples += 1;
                    if !is_independent(geo, sign, &img(&[a, b, c, d]))? {
                        rep.dependent_quadruples += 1;
                        rep.first_dependent
                            .get_or_insert(vec![a as u32, b as u32, c as u32, d as u32]);
                    }
                }
            }
        }
    }
    Ok(rep)
}
