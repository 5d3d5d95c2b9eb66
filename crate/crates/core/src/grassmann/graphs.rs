use rayon::prelude::*;
use serde::Serialize;

use super::{PolarGeometry, Sign};
use crate::graphcore::{all_pairs_distances, DistanceMatrix, FiniteGraph};
use crate::{Error, Result};

/// Generators adjacent when they meet in a hyperplane. Vertex `i` is generator `i`.
#[derive(Clone, Debug)]
pub struct DualPolarGraph {
    pub graph: FiniteGraph,
    pub dm: DistanceMatrix,
}

/// Members of one family of a type D geometry, as generator indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HalfSpinFamily {
    pub sign: Sign,
    pub members: Vec<usize>,
}

/// One family, adjacent when two members meet in codimension two.
/// Vertex `v` is family member `v` (see [`PolarGeometry::member`]).
#[derive(Clone, Debug)]
pub struct HalfSpinGraph {
    pub sign: Sign,
    pub graph: FiniteGraph,
    pub dm: DistanceMatrix,
}

fn check_metric(dm: &DistanceMatrix, what: &str, formula: impl Fn(usize, usize) -> u32 + Sync) -> Result<()> {
    let n = dm.order();
    let bad = (0..n)
        .into_par_iter()
        .find_map_first(|u| (0..n).find(|&v| dm.get(u, v) != formula(u, v)).map(|v| (u, v)));
    match bad {
        None => Ok(()),
        Some((u, v)) => Err(Error::Contradiction(format!(
            "{what}: BFS distance {} differs from the intersection formula {} at ({u}, {v})",
            dm.get(u, v),
            formula(u, v)
        ))),
    }
}

/// Builds the dual polar graph and checks BFS distances against
/// `n - 1 - pdim(S ∩ U)` on every pair.
pub fn build_dual_polar_graph(geo: &PolarGeometry) -> Result<DualPolarGraph> {
    let n = geo.n();
    let gens = geo.generators();
    let graph = FiniteGraph::from_predicate(gens.len(), Some(format!("dual:D{n}")), |u, v| {
        gens[u].meet_vdim(&gens[v]) == n - 1
    })?;
    let dm = all_pairs_distances(&graph)?;
    check_metric(&dm, "dual polar graph", |u, v| geo.dual_distance(&gens[u], &gens[v]))?;
    Ok(DualPolarGraph { graph, dm })
}

/// Two-colours the generators by distance parity from `base` and checks that
/// every pair across the colouring is at odd distance. The class of the
/// standard generator is labelled `+`.
pub fn split_families(geo: &PolarGeometry, dual: &DualPolarGraph, base: usize) -> Result<(HalfSpinFamily, HalfSpinFamily)> {
    let dm = &dual.dm;
    let n = dm.order();
    if base >= n {
        return Err(Error::InvalidParameter(format!("base generator {base} out of range")));
    }
    let class: Vec<u32> = (0..n).map(|v| dm.get(base, v) % 2).collect();
    let bad = (0..n).into_par_iter().find_map_first(|u| {
        (0..n)
            .find(|&v| dm.get(u, v) % 2 != (class[u] ^ class[v]))
            .map(|v| (u, v))
    });
    if let Some((u, v)) = bad {
        return Err(Error::Contradiction(format!(
            "parity of d({u}, {v}) disagrees with the two-colouring"
        )));
    }
    let s0 = geo.model().span(&geo.form().standard_generator_rows())?;
    let s0 = geo
        .generator_index(&s0)
        .ok_or_else(|| Error::Contradiction("standard generator missing".into()))?;
    let plus: Vec<usize> = (0..n).filter(|&v| class[v] == class[s0]).collect();
    let minus: Vec<usize> = (0..n).filter(|&v| class[v] != class[s0]).collect();
    if plus != geo.family(Sign::Plus) || minus != geo.family(Sign::Minus) {
        return Err(Error::Contradiction(
            "distance parity disagrees with the meet-parity family labels".into(),
        ));
    }
    Ok((
        HalfSpinFamily {
            sign: Sign::Plus,
            members: plus,
        },
        HalfSpinFamily {
            sign: Sign::Minus,
            members: minus,
        },
    ))
}

/// Builds a half-spin graph and checks BFS distances against
/// `(n - 1 - pdim(S ∩ U)) / 2` on every pair.
pub fn build_halfspin_graph(geo: &PolarGeometry, sign: Sign) -> Result<HalfSpinGraph> {
    let n = geo.n();
    if n < 3 {
        return Err(Error::InvalidParameter("half-spin graphs need n >= 3".into()));
    }
    let fam = geo.family(sign);
    let graph = FiniteGraph::from_predicate(fam.len(), Some(format!("halfspin:D{n}:{sign}")), |u, v| {
        geo.member(sign, u).meet_vdim(geo.member(sign, v)) == n - 2
    })?;
    let dm = all_pairs_distances(&graph)?;
    check_metric(&dm, "half-spin graph", |u, v| geo.halfspin_distance(sign, u, v))?;
    Ok(HalfSpinGraph { sign, graph, dm })
}

impl HalfSpinGraph {
    /// Checks `d_halfspin = d_dual / 2` on every pair.
    pub fn check_against_dual(&self, geo: &PolarGeometry, dual: &DualPolarGraph) -> Result<()> {
        let fam = geo.family(self.sign);
        check_metric(&self.dm, "half-spin versus dual", |u, v| dual.dm.get(fam[u], fam[v]) / 2)
    }
}

/// For a geodesic `X_1, ..., X_i` of the dual polar graph (generator
/// indices), whether `X_1 ∩ X_i` lies in every `X_j`.
pub fn geodesic_sandwich_check(geo: &PolarGeometry, dual: &DualPolarGraph, path: &[usize]) -> Result<bool> {
    let (Some(&first), Some(&last)) = (path.first(), path.last()) else {
        return Err(Error::Precondition("empty path".into()));
    };
    if path.iter().any(|&x| x >= dual.dm.order()) {
        return Err(Error::InvalidParameter("path vertex out of range".into()));
    }
    for (j, &x) in path.iter().enumerate() {
        if dual.dm.get(first, x) != j as u32 {
            return Err(Error::Precondition(format!("path is not a geodesic at step {j}")));
        }
    }
    if dual.dm.get(first, last) as usize != path.len() - 1 {
        return Err(Error::Precondition("path is not a geodesic".into()));
    }
    let ends = geo.generator(first).intersection(geo.generator(last));
    Ok(path.iter().all(|&x| geo.generator(x).contains_subspace(&ends)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphcore::complete_graph;

    #[test]
    fn dual_graph_n4() {
        let geo = PolarGeometry::new(4).unwrap();
        let dual = build_dual_polar_graph(&geo).unwrap();
        assert_eq!(dual.graph.vertex_count(), 270);
        assert_eq!(dual.dm.diameter(), 4);
        for (u, v) in dual.dm.opposite_pairs() {
            assert_eq!(geo.generator(u).meet_vdim(geo.generator(v)), 0);
        }
        for u in 0..270 {
            assert_eq!(dual.dm.get(u, u), 0);
        }
    }

    #[test]
    fn families_n2_are_disjoint_lines() {
        let geo = PolarGeometry::new(2).unwrap();
        let dual = build_dual_polar_graph(&geo).unwrap();
        let (p, m) = split_families(&geo, &dual, 0).unwrap();
        assert_eq!((p.members.len(), m.members.len()), (3, 3));
        for fam in [&p, &m] {
            for (i, &a) in fam.members.iter().enumerate() {
                for &b in &fam.members[i + 1..] {
                    assert_eq!(geo.generator(a).meet_vdim(geo.generator(b)), 0);
                }
            }
        }
    }

    #[test]
    fn partition_independent_of_base() {
        let geo = PolarGeometry::new(4).unwrap();
        let dual = build_dual_polar_graph(&geo).unwrap();
        let a = split_families(&geo, &dual, 0).unwrap();
        let b = split_families(&geo, &dual, 137).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn halfspin_graphs() {
        let geo = PolarGeometry::new(3).unwrap();
        let h = build_halfspin_graph(&geo, Sign::Plus).unwrap();
        assert_eq!(h.graph.edges(), complete_graph(15).edges());

        let geo = PolarGeometry::new(4).unwrap();
        let dual = build_dual_polar_graph(&geo).unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            let h = build_halfspin_graph(&geo, sign).unwrap();
            assert_eq!(h.graph.vertex_count(), 135);
            assert_eq!(h.dm.diameter(), 2);
            h.check_against_dual(&geo, &dual).unwrap();
            for (u, v) in h.dm.opposite_pairs() {
                assert_eq!(geo.member(sign, u).meet_vdim(geo.member(sign, v)), 0);
            }
        }
    }

    #[test]
    fn sandwich() {
        let geo = PolarGeometry::new(4).unwrap();
        let dual = build_dual_polar_graph(&geo).unwrap();
        assert!(geodesic_sandwich_check(&geo, &dual, &[5]).unwrap());
        // greedy geodesic from 0 to an opposite vertex
        let far = (0..270).find(|&v| dual.dm.get(0, v) == 4).unwrap();
        let mut path = vec![0];
        while *path.last().unwrap() != far {
            let x = *path.last().unwrap();
            let next = dual
                .graph
                .neighbors(x)
                .iter()
                .map(|&y| y as usize)
                .find(|&y| dual.dm.get(y, far) + 1 == dual.dm.get(x, far))
                .unwrap();
            path.push(next);
        }
        assert!(geodesic_sandwich_check(&geo, &dual, &path).unwrap());
        let y = dual.graph.neighbors(0)[0] as usize;
        assert!(geodesic_sandwich_check(&geo, &dual, &[0, y, 0]).is_err());
    }
}
