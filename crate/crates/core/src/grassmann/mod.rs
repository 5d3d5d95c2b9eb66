//! Generators of the polar space, the dual polar graph and the two half-spin
//! Grassmann graphs, with their lines, maximal cliques and parabolic subspaces.

mod cliques;
mod graphs;
mod parabolic;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::quadric::{PolarSpaceModel, QuadraticForm, Route, SingularSubspace};
use crate::{Error, Result};

pub use cliques::{
    classify_host_clique, clique_census, clique_intersection_type, halfspin_line,
    halfspin_span, is_independent, line_closure_check, special_of, star_of, CliqueCensus,
    CliqueClassification, CliqueKind, IntersectionType, LineClosureReport,
};
pub use graphs::{
    build_dual_polar_graph, build_halfspin_graph, geodesic_sandwich_check, split_families,
    DualPolarGraph, HalfSpinFamily, HalfSpinGraph,
};
pub use parabolic::{
    generators_through, parabolic_members, quotient_collineation, ParabolicSubspace,
    ParabolicTarget, QuotientCollineation,
};

/// Label of a half-spin family. `Plus` contains `<e1, e3, ..., e(2n-1)>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn opposite(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    fn slot(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Sign> {
        match s {
            "+" | "plus" => Ok(Sign::Plus),
            "-" | "minus" => Ok(Sign::Minus),
            _ => Err(Error::InvalidParameter(format!("unknown family sign {s:?}"))),
        }
    }
}

/// Family of a generator of the rank-`n` hyperbolic form, from the parity of
/// its meet with the standard generator.
pub fn generator_sign(n: usize, s: &SingularSubspace) -> Sign {
    let form = QuadraticForm::hyperbolic(n);
    let base = SingularSubspace::from_canonical(n, &form.standard_generator_rows())
        .expect("rank bounded");
    if (s.meet_vdim(&base) + n) % 2 == 0 {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// The polar space model together with its generators split into families.
#[derive(Debug)]
pub struct PolarGeometry {
    model: PolarSpaceModel,
    generators: Vec<SingularSubspace>,
    index: HashMap<SingularSubspace, usize>,
    signs: Vec<Sign>,
    families: [Vec<usize>; 2],
    local: Vec<u32>,
}

impl PolarGeometry {
    /// Builds the rank-`n` geometry with default budgets.
    pub fn new(n: usize) -> Result<Self> {
        Self::from_model(PolarSpaceModel::hyperbolic(n)?)
    }

    /// Generators come from the extension route when its intermediate levels
    /// fit the budget and from the pruned echelon search otherwise.
    pub fn from_model(model: PolarSpaceModel) -> Result<Self> {
        if model.form().radical() != 0 {
            return Err(Error::Precondition("geometry needs a non-degenerate form".into()));
        }
        let k = model.rank() as i32 - 1;
        let generators = match model.enumerate_with(k, Route::Extension) {
            Err(e) if e.is_budget() => model.enumerate_with(k, Route::Echelon)?,
            other => other?,
        };
        Self::with_generators(model, generators)
    }

    pub fn with_generators(model: PolarSpaceModel, generators: Vec<SingularSubspace>) -> Result<Self> {
        let n = model.rank();
        let index: HashMap<SingularSubspace, usize> =
            generators.iter().enumerate().map(|(i, g)| (*g, i)).collect();
        let signs: Vec<Sign> = generators.iter().map(|g| generator_sign(n, g)).collect();
        let mut families = [Vec::new(), Vec::new()];
        let mut local = Vec::with_capacity(generators.len());
        for (i, s) in signs.iter().enumerate() {
            local.push(families[s.slot()].len() as u32);
            families[s.slot()].push(i);
        }
        Ok(PolarGeometry {
            model,
            generators,
            index,
            signs,
            families,
            local,
        })
    }

    pub fn n(&self) -> usize {
        self.model.rank()
    }

    pub fn model(&self) -> &PolarSpaceModel {
        &self.model
    }

    pub fn form(&self) -> &QuadraticForm {
        self.model.form()
    }

    /// All generators, sorted.
    pub fn generators(&self) -> &[SingularSubspace] {
        &self.generators
    }

    pub fn generator(&self, i: usize) -> &SingularSubspace {
        &self.generators[i]
    }

    pub fn generator_index(&self, s: &SingularSubspace) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn sign(&self, i: usize) -> Sign {
        self.signs[i]
    }

    /// Generator indices of a family, increasing.
    pub fn family(&self, sign: Sign) -> &[usize] {
        &self.families[sign.slot()]
    }

    /// Position of generator `i` inside its family.
    pub fn local_index(&self, i: usize) -> usize {
        self.local[i] as usize
    }

    /// Family member number `v` of `sign`.
    pub fn member(&self, sign: Sign, v: usize) -> &SingularSubspace {
        &self.generators[self.families[sign.slot()][v]]
    }

    /// Family-local index of a generator, if it belongs to `sign`.
    pub fn member_index(&self, sign: Sign, s: &SingularSubspace) -> Option<usize> {
        let g = self.generator_index(s)?;
        (self.signs[g] == sign).then(|| self.local_index(g))
    }

    /// Projective dimension of the meet of family members `u` and `v`.
    #[inline]
    pub fn member_meet_pdim(&self, sign: Sign, u: usize, v: usize) -> i32 {
        self.member(sign, u).meet_vdim(self.member(sign, v)) as i32 - 1
    }

    /// Half-spin distance between family members.
    #[inline]
    pub fn halfspin_distance(&self, sign: Sign, u: usize, v: usize) -> u32 {
        let meet = self.member(sign, u).meet_vdim(self.member(sign, v));
        ((self.n() - meet) / 2) as u32
    }

    /// Dual polar distance `n - 1 - pdim(S ∩ U)`.
    pub fn dual_distance(&self, s: &SingularSubspace, u: &SingularSubspace) -> u32 {
        (self.n() - s.meet_vdim(u)) as u32
    }

    /// Point indices of the model lying in `s`, increasing.
    pub fn point_indices(&self, s: &SingularSubspace) -> Vec<usize> {
        let mut v: Vec<usize> = s
            .points()
            .into_iter()
            .map(|p| self.model.point_index(p).expect("points of a singular subspace are singular"))
            .collect();
        v.sort_unstable();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_sizes() {
        for (n, gens) in [(2, 6), (3, 30), (4, 270), (5, 4590)] {
            let g = PolarGeometry::new(n).unwrap();
            assert_eq!(g.generators().len(), gens);
            assert_eq!(g.family(Sign::Plus).len(), gens / 2);
            assert_eq!(g.family(Sign::Minus).len(), gens / 2);
        }
    }

    #[test]
    fn standard_generator_is_plus() {
        let g = PolarGeometry::new(4).unwrap();
        let s0 = g.model().span(&g.form().standard_generator_rows()).unwrap();
        assert_eq!(g.sign(g.generator_index(&s0).unwrap()), Sign::Plus);
    }

    #[test]
    fn sign_parsing() {
        assert_eq!("+".parse::<Sign>().unwrap(), Sign::Plus);
        assert_eq!("-".parse::<Sign>().unwrap(), Sign::Minus);
        assert!("x".parse::<Sign>().is_err());
        assert_eq!(serde_json::to_string(&Sign::Minus).unwrap(), "\"-\"");
    }
}
