use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use super::graphs::HalfSpinGraph;
use super::parabolic::generators_through;
use super::{PolarGeometry, Sign};
use crate::graphcore::{enumerate_maximal_cliques, DEFAULT_CLIQUE_LIMIT};
use crate::quadric::{SingularSubspace, SubspaceJson};
use crate::{Error, Result};

/// Witness of a maximal clique of a half-spin graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CliqueKind {
    /// All family members containing `m`, `pdim(m) = n - 4`.
    Star { m: SingularSubspace },
    /// All family members meeting the opposite-family generator `u` in a hyperplane.
    Special { u: SingularSubspace },
}

impl CliqueKind {
    pub fn is_star(&self) -> bool {
        matches!(self, CliqueKind::Star { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            CliqueKind::Star { .. } => "star",
            CliqueKind::Special { .. } => "special",
        }
    }

    pub fn witness(&self) -> &SingularSubspace {
        match self {
            CliqueKind::Star { m } => m,
            CliqueKind::Special { u } => u,
        }
    }
}

/// A maximal clique of the half-spin graph of `sign`, with members as
/// family-local indices in increasing order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CliqueClassification {
    pub sign: Sign,
    pub kind: CliqueKind,
    pub members: Vec<usize>,
}

fn to_local(geo: &PolarGeometry, gens: Vec<usize>) -> Vec<usize> {
    let mut v: Vec<usize> = gens.into_iter().map(|g| geo.local_index(g)).collect();
    v.sort_unstable();
    v
}

/// The star `[M>` of a family, `pdim(M) = n - 4`.
pub fn star_of(geo: &PolarGeometry, sign: Sign, m: &SingularSubspace) -> Result<CliqueClassification> {
    let n = geo.n() as i32;
    if m.pdim() != n - 4 {
        return Err(Error::InvalidParameter(format!(
            "a star needs pdim(M) = {}, got {}",
            n - 4,
            m.pdim()
        )));
    }
    let members = to_local(geo, generators_through(geo, m, Some(sign))?);
    Ok(CliqueClassification {
        sign,
        kind: CliqueKind::Star { m: *m },
        members,
    })
}

/// The special subspace `[U]` of a family, `U` a generator of the other family.
pub fn special_of(geo: &PolarGeometry, sign: Sign, u: &SingularSubspace) -> Result<CliqueClassification> {
    let ui = geo
        .generator_index(u)
        .ok_or_else(|| Error::InvalidParameter("U is not a generator".into()))?;
    if geo.sign(ui) != sign.opposite() {
        return Err(Error::InvalidParameter("U must lie in the opposite family".into()));
    }
    // every hyperplane of U lies in exactly one other generator
    let mut members = Vec::new();
    for h in u.hyperplanes() {
        let through = generators_through(geo, &h, None)?;
        let others: Vec<usize> = through.into_iter().filter(|&g| g != ui).collect();
        if others.len() != 1 || geo.sign(others[0]) != sign {
            return Err(Error::Contradiction(
                "a hyperplane of a generator is not in exactly two generators".into(),
            ));
        }
        members.push(others[0]);
    }
    Ok(CliqueClassification {
        sign,
        kind: CliqueKind::Special { u: *u },
        members: to_local(geo, members),
    })
}

/// Classifies a maximal clique of the half-spin graph from its subspaces:
/// the common intersection is tried as a star witness, the span of the
/// pairwise intersections as a special witness.
pub fn classify_host_clique(geo: &PolarGeometry, sign: Sign, members: &[usize]) -> Result<CliqueClassification> {
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() < 2 {
        return Err(Error::Precondition("clique needs at least two members".into()));
    }
    let n = geo.n();
    let subs: Vec<&SingularSubspace> = sorted.iter().map(|&v| geo.member(sign, v)).collect();

    let common = subs[1..]
        .iter()
        .fold(*subs[0], |acc, s| acc.intersection(s));
    let star = if common.pdim() == n as i32 - 4 {
        let s = star_of(geo, sign, &common)?;
        (s.members == sorted).then_some(s)
    } else {
        None
    };

    let mut vecs = Vec::new();
    for (i, a) in subs.iter().enumerate() {
        for b in &subs[i + 1..] {
            vecs.extend_from_slice(a.intersection(b).rows());
        }
    }
    let special = match geo.model().span(&vecs) {
        Ok(u) if u.vdim() == n && geo.generator_index(&u).is_some_and(|g| geo.sign(g) != sign) => {
            let s = special_of(geo, sign, &u)?;
            (s.members == sorted).then_some(s)
        }
        _ => None,
    };

    match (star, special) {
        (Some(s), None) | (None, Some(s)) => Ok(s),
        (Some(_), Some(_)) => Err(Error::Contradiction(
            "clique is both a star and a special subspace".into(),
        )),
        (None, None) => Err(Error::Precondition(
            "vertex set is neither a star nor a special subspace".into(),
        )),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CensusRow {
    pub kind: &'static str,
    pub witness_pdim: i32,
    pub size: usize,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CliqueCensus {
    pub n: usize,
    pub sign: Sign,
    pub maximal_cliques: usize,
    pub rows: Vec<CensusRow>,
    /// Every maximal clique classified as exactly one kind.
    pub all_classified: bool,
    /// The enumerated maximal cliques are exactly the stars over all
    /// `(n-4)`-subspaces together with the specials over all opposite generators.
    pub matches_generated: bool,
    #[serde(skip)]
    pub cliques: Vec<CliqueClassification>,
}

/// Enumerates the maximal cliques of a half-spin graph, classifies each, and
/// compares with the stars and specials generated from their witnesses.
pub fn clique_census(geo: &PolarGeometry, hs: &HalfSpinGraph) -> Result<CliqueCensus> {
    let sign = hs.sign;
    let n = geo.n();
    if n < 4 {
        return Err(Error::Precondition("clique census needs n >= 4".into()));
    }
    let raw = enumerate_maximal_cliques(&hs.graph, DEFAULT_CLIQUE_LIMIT)?;
    let classified: Vec<Result<CliqueClassification>> = raw
        .par_iter()
        .map(|c| classify_host_clique(geo, sign, c))
        .collect();
    let all_classified = classified.iter().all(|c| c.is_ok());
    let cliques: Vec<CliqueClassification> = classified.into_iter().filter_map(|c| c.ok()).collect();

    let mut tally: BTreeMap<(&'static str, i32, usize), usize> = BTreeMap::new();
    for c in &cliques {
        *tally
            .entry((c.kind.name(), c.kind.witness().pdim(), c.members.len()))
            .or_default() += 1;
    }
    let rows = tally
        .into_iter()
        .map(|((kind, witness_pdim, size), count)| CensusRow {
            kind,
            witness_pdim,
            size,
            count,
        })
        .collect();

    let mut generated: Vec<Vec<usize>> = geo
        .model()
        .enumerate_singular_subspaces(n as i32 - 4)?
        .par_iter()
        .map(|m| star_of(geo, sign, m).map(|c| c.members))
        .collect::<Result<_>>()?;
    let specials: Vec<Vec<usize>> = geo
        .family(sign.opposite())
        .par_iter()
        .map(|&g| special_of(geo, sign, geo.generator(g)).map(|c| c.members))
        .collect::<Result<_>>()?;
    generated.extend(specials);
    generated.sort();
    generated.dedup();

    Ok(CliqueCensus {
        n,
        sign,
        maximal_cliques: raw.len(),
        rows,
        all_classified,
        matches_generated: generated == raw,
        cliques,
    })
}

/// Structure of the intersection of two maximal cliques inside the half-spin space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum IntersectionType {
    Empty,
    Point,
    Line,
    Plane,
    /// Anything else; the size is kept for reporting.
    Other(usize),
}

pub fn clique_intersection_type(
    geo: &PolarGeometry,
    c1: &CliqueClassification,
    c2: &CliqueClassification,
) -> Result<IntersectionType> {
    if c1.sign != c2.sign {
        return Err(Error::Precondition("cliques from different families".into()));
    }
    if c1.members == c2.members {
        return Err(Error::Precondition("cliques must be distinct".into()));
    }
    let sign = c1.sign;
    let b: BTreeSet<usize> = c2.members.iter().copied().collect();
    let inter: Vec<usize> = c1.members.iter().copied().filter(|v| b.contains(v)).collect();
    if inter.is_empty() {
        return Ok(IntersectionType::Empty);
    }
    if halfspin_span(geo, sign, &inter)? != inter {
        return Ok(IntersectionType::Other(inter.len()));
    }
    // rank of the subspace: size of a greedy independent generating set
    let mut basis: Vec<usize> = Vec::new();
    let mut span: Vec<usize> = Vec::new();
    for &v in &inter {
        if span.binary_search(&v).is_err() {
            basis.push(v);
            span = halfspin_span(geo, sign, &basis)?;
        }
    }
    Ok(match basis.len() {
        1 => IntersectionType::Point,
        2 => IntersectionType::Line,
        3 => IntersectionType::Plane,
        _ => IntersectionType::Other(inter.len()),
    })
}

/// The line `[N>` of a family, `pdim(N) = n - 3`, as family-local indices.
pub fn halfspin_line(geo: &PolarGeometry, sign: Sign, nsub: &SingularSubspace) -> Result<Vec<usize>> {
    let n = geo.n() as i32;
    if nsub.pdim() != n - 3 {
        return Err(Error::InvalidParameter(format!(
            "a half-spin line needs pdim = {}, got {}",
            n - 3,
            nsub.pdim()
        )));
    }
    Ok(to_local(geo, generators_through(geo, nsub, Some(sign))?))
}

/// Smallest set of family members containing `members` and closed under
/// half-spin lines through adjacent pairs. Cost grows with the size of the result.
pub fn halfspin_span(geo: &PolarGeometry, sign: Sign, members: &[usize]) -> Result<Vec<usize>> {
    let n = geo.n();
    let mut set: BTreeSet<usize> = members.iter().copied().collect();
    let mut done: BTreeSet<(usize, usize)> = BTreeSet::new();
    loop {
        let cur: Vec<usize> = set.iter().copied().collect();
        let mut added = false;
        for (i, &a) in cur.iter().enumerate() {
            for &b in &cur[i + 1..] {
                if !done.insert((a, b)) {
                    continue;
                }
                let (sa, sb) = (geo.member(sign, a), geo.member(sign, b));
                if sa.meet_vdim(sb) != n - 2 {
                    continue;
                }
                for c in halfspin_line(geo, sign, &sa.intersection(sb))? {
                    added |= set.insert(c);
                }
            }
        }
        if !added {
            return Ok(set.into_iter().collect());
        }
    }
}

/// No member lies in the span of the others.
pub fn is_independent(geo: &PolarGeometry, sign: Sign, members: &[usize]) -> Result<bool> {
    for (i, &x) in members.iter().enumerate() {
        let rest: Vec<usize> = members
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &y)| y)
            .collect();
        if halfspin_span(geo, sign, &rest)?.binary_search(&x).is_ok() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Result of checking that a vertex adjacent to two adjacent members is
/// adjacent to every member of the line through them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LineClosureReport {
    pub adjacent_pairs: usize,
    pub triples_checked: u64,
    pub violations: u64,
    pub first_violation: Option<(usize, usize, usize)>,
    /// Histogram `line size -> number of adjacent pairs whose line has that size`.
    pub line_sizes: Vec<(usize, usize)>,
}

pub fn line_closure_check(geo: &PolarGeometry, hs: &HalfSpinGraph) -> Result<LineClosureReport> {
    let sign = hs.sign;
    let g = &hs.graph;
    let edges = g.edges();
    let per_pair: Vec<(usize, u64, u64, Option<(usize, usize, usize)>)> = edges
        .par_iter()
        .map(|&(x, y)| {
            let (sx, sy) = (geo.member(sign, x), geo.member(sign, y));
            let line = halfspin_line(geo, sign, &sx.intersection(sy))?;
            let mut checked = 0;
            let mut bad = 0;
            let mut first = None;
            for &z in g.neighbors(x) {
                let z = z as usize;
                if z == y || !g.is_adjacent(z, y) {
                    continue;
                }
                checked += 1;
                if line.iter().any(|&w| w != z && !g.is_adjacent(z, w)) {
                    bad += 1;
                    first.get_or_insert((x, y, z));
                }
            }
            Ok((line.len(), checked, bad, first))
        })
        .collect::<Result<_>>()?;
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for p in &per_pair {
        *sizes.entry(p.0).or_default() += 1;
    }
    Ok(LineClosureReport {
        adjacent_pairs: edges.len(),
        triples_checked: per_pair.iter().map(|p| p.1).sum(),
        violations: per_pair.iter().map(|p| p.2).sum(),
        first_violation: per_pair.iter().find_map(|p| p.3),
        line_sizes: sizes.into_iter().collect(),
    })
}

impl CliqueClassification {
    pub fn witness_json(&self) -> SubspaceJson {
        self.kind.witness().to_json()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::build_halfspin_graph;

    #[test]
    fn census_n4() {
        let geo = PolarGeometry::new(4).unwrap();
        let hs = build_halfspin_graph(&geo, Sign::Plus).unwrap();
        let c = clique_census(&geo, &hs).unwrap();
        assert!(c.all_classified && c.matches_generated);
        assert_eq!(c.maximal_cliques, 270);
        assert_eq!(
            c.rows,
            vec![
                CensusRow { kind: "special", witness_pdim: 3, size: 15, count: 135 },
                CensusRow { kind: "star", witness_pdim: 0, size: 15, count: 135 },
            ]
        );
        for cl in &c.cliques {
            assert!(hs.graph.is_clique(&cl.members));
        }
    }

    #[test]
    fn lines_have_three_members_and_close() {
        let geo = PolarGeometry::new(4).unwrap();
        let hs = build_halfspin_graph(&geo, Sign::Minus).unwrap();
        let r = line_closure_check(&geo, &hs).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.line_sizes, vec![(3, r.adjacent_pairs)]);
    }

    #[test]
    fn star_inside_special_meets_in_a_plane() {
        let geo = PolarGeometry::new(4).unwrap();
        let u = *geo.member(Sign::Minus, 0);
        let p = geo.model().span(&[u.rows()[0]]).unwrap();
        let st = star_of(&geo, Sign::Plus, &p).unwrap();
        let sp = special_of(&geo, Sign::Plus, &u).unwrap();
        assert_eq!(clique_intersection_type(&geo, &st, &sp).unwrap(), IntersectionType::Plane);
        assert!(clique_intersection_type(&geo, &st, &st).is_err());
    }

    #[test]
    fn wrong_witness_dimension() {
        let geo = PolarGeometry::new(4).unwrap();
        let l = geo.model().span(&[1, 4]).unwrap();
        assert!(star_of(&geo, Sign::Plus, &l).is_err());
        assert!(special_of(&geo, Sign::Plus, geo.member(Sign::Plus, 0)).is_err());
    }
}
