//! Embeddings of cubes and half-cubes into the dual polar and half-spin
//! graphs: search, verification, the (A)/(B) dichotomy, extension to the
//! hypercube, frame recovery and the theorem drivers built on them.

mod classify;
mod extend;
mod host;
mod search;
mod theorems;

use serde::Serialize;

use crate::graphcore::DistanceMatrix;
use crate::{Error, Result};

pub use classify::{
    classify_ab, halfcube_cliques, independence_checks, type_swap_automorphism_h4, unique_host_clique,
    ABClass, CliqueRow, HostCliqueIndex, IndependenceReport, PatternClique, AbVerdict,
};
pub use extend::{
    extend_to_hypercube, frame_flags, hypercube_extension_raw, recover_frame, recover_frame_points,
    restriction_isometry_checks, DualTables, RecoveredFrame,
    RestrictionReport,
};
pub use host::{FormulaHost, Host, Kind, TableHost};
pub use search::{sample_embeddings, search_embeddings, search_fold, Pattern, Sample, SearchConfig, SearchStats};
pub use theorems::{
    apartment_round_trips, corollary_suite, open_problem_probe, verify_hypercube_theorem, verify_main_theorem,
    verify_main_theorem_with, run_search, ApartmentComparison, ClassificationTally, CorollaryReport, ExtensionTally,
    KeptSolution, MainOptions, PatternSpec, RoundTripReport, SearchReport, VerdictCounts,
    HypercubeTheoremReport, MainTheoremReport, OpenProbeReport,
};

/// An assignment of host vertices to pattern vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VertexMap {
    pub kind: Kind,
    pub images: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub u: usize,
    pub v: usize,
    pub pattern_distance: u32,
    pub host_distance: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmbeddingCheck {
    pub kind: Kind,
    pub ok: bool,
    pub injective: bool,
    /// Pattern pairs at distance 2 land at distance 2; only meaningful for weak maps.
    pub distance_two_preserved: bool,
    pub first_violation: Option<Violation>,
}

/// Checks every pair of pattern vertices against the contract of `kind`.
pub fn check_embedding<H: Host + ?Sized>(pattern: &DistanceMatrix, host: &H, images: &[u32], kind: Kind) -> Result<EmbeddingCheck> {
    if images.len() != pattern.order() {
        return Err(Error::Precondition(format!(
            "map has {} images for {} pattern vertices",
            images.len(),
            pattern.order()
        )));
    }
    if let Some(&x) = images.iter().find(|&&x| x as usize >= host.order()) {
        return Err(Error::Precondition(format!("image {x} is not a host vertex")));
    }
    let mut out = EmbeddingCheck {
        kind,
        ok: true,
        injective: true,
        distance_two_preserved: true,
        first_violation: None,
    };
    for u in 0..images.len() {
        for v in u + 1..images.len() {
            let dp = pattern.get(u, v);
            let dh = host.distance(images[u] as usize, images[v] as usize);
            if dh == 0 {
                out.injective = false;
            }
            if dp == 2 && dh != 2 {
                out.distance_two_preserved = false;
            }
            let bad = match kind {
                Kind::Weak => dh == 0 || (dp == 1) != (dh == 1),
                Kind::Isometric => dp != dh,
            };
            if bad {
                out.ok = false;
                out.first_violation.get_or_insert(Violation {
                    u,
                    v,
                    pattern_distance: dp,
                    host_distance: dh,
                });
            }
        }
    }
    if kind == Kind::Weak && out.ok && !out.distance_two_preserved {
        return Err(Error::Contradiction(
            "weak embedding moves a distance-2 pair off distance 2".into(),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphcore::{all_pairs_distances, build_halfcube};

    #[test]
    fn identity_and_collapse() {
        let dm = all_pairs_distances(&build_halfcube(4).unwrap()).unwrap();
        let h = TableHost::new(dm.clone());
        let id: Vec<u32> = (0..8).collect();
        let r = check_embedding(&dm, &h, &id, Kind::Isometric).unwrap();
        assert!(r.ok && r.injective);
        // 0 and 7 are antipodal; sending 7 onto a neighbour of 0 collapses distance 2 to 1
        let mut bad = id.clone();
        bad[7] = 1;
        let r = check_embedding(&dm, &h, &bad, Kind::Isometric).unwrap();
        assert!(!r.ok);
        let w = r.first_violation.unwrap();
        assert_eq!((w.pattern_distance, w.host_distance), (2, 1));
        assert!(check_embedding(&dm, &h, &id[..7], Kind::Weak).is_err());
    }
}
