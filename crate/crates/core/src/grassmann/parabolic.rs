use rayon::prelude::*;
use serde::Serialize;

use super::{generator_sign, PolarGeometry, Sign};
use crate::quadric::{PolarSpaceModel, Quotient, Route, SingularSubspace};
use crate::{Error, Result};

/// Where the members of a parabolic subspace are taken from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ParabolicTarget {
    /// All generators; members are generator indices.
    Dual,
    /// One family; members are family-local indices.
    Family(Sign),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParabolicSubspace {
    pub m: SingularSubspace,
    pub target: ParabolicTarget,
    pub members: Vec<usize>,
}

/// Every target element containing `m`, found by scanning.
pub fn parabolic_members(geo: &PolarGeometry, m: &SingularSubspace, target: ParabolicTarget) -> Result<ParabolicSubspace> {
    let n = geo.n() as i32;
    let max = match target {
        ParabolicTarget::Dual => n - 3,
        ParabolicTarget::Family(_) => n - 4,
    };
    if m.pdim() > max {
        return Err(Error::InvalidParameter(format!(
            "parabolic subspaces of this kind need pdim(M) <= {max}, got {}",
            m.pdim()
        )));
    }
    let members = match target {
        ParabolicTarget::Dual => (0..geo.generators().len())
            .into_par_iter()
            .filter(|&i| geo.generator(i).contains_subspace(m))
            .collect(),
        ParabolicTarget::Family(s) => (0..geo.family(s).len())
            .into_par_iter()
            .filter(|&v| geo.member(s, v).contains_subspace(m))
            .collect(),
    };
    Ok(ParabolicSubspace {
        m: *m,
        target,
        members,
    })
}

/// Generators of the rank-`r` quotient, through a small enumeration.
fn quotient_generators(r: usize) -> Result<Vec<SingularSubspace>> {
    if r == 0 {
        return Ok(vec![SingularSubspace::empty(0)]);
    }
    PolarSpaceModel::hyperbolic(r)?.enumerate_with(r as i32 - 1, Route::Echelon)
}

/// Generators containing `m` (optionally only those of one family), as
/// generator indices, by lifting the generators of `m^perp / m`.
pub fn generators_through(geo: &PolarGeometry, m: &SingularSubspace, sign: Option<Sign>) -> Result<Vec<usize>> {
    let q = Quotient::new(geo.form(), m)?;
    let mut out = Vec::new();
    for g in quotient_generators(q.rank())? {
        let lifted = q.lift_subspace(&g)?;
        if sign.is_some_and(|s| generator_sign(geo.n(), &lifted) != s) {
            continue;
        }
        let idx = geo
            .generator_index(&lifted)
            .ok_or_else(|| Error::Contradiction("lifted subspace is not a generator".into()))?;
        out.push(idx);
    }
    out.sort_unstable();
    Ok(out)
}

/// The correspondence between a parabolic subspace of a family and one family
/// of the quotient geometry `M^perp / M`.
#[derive(Clone, Debug)]
pub struct QuotientCollineation {
    pub m: SingularSubspace,
    pub sign: Sign,
    pub quotient: Quotient,
    /// Family of the quotient that the parabolic subspace maps onto.
    pub quotient_sign: Sign,
    /// `(family-local index in the ambient geometry, family-local index in the quotient)`.
    pub pairs: Vec<(usize, usize)>,
}

/// Builds the correspondence and checks that it is a bijection onto a family
/// of the quotient that shifts every meet dimension by exactly `vdim(M)`, so
/// adjacency, lines and distances all correspond.
pub fn quotient_collineation(
    geo: &PolarGeometry,
    qgeo: &PolarGeometry,
    m: &SingularSubspace,
    sign: Sign,
) -> Result<QuotientCollineation> {
    let quotient = Quotient::new(geo.form(), m)?;
    if qgeo.n() != quotient.rank() {
        return Err(Error::InvalidParameter(format!(
            "quotient has rank {}, geometry given has rank {}",
            quotient.rank(),
            qgeo.n()
        )));
    }
    let members = parabolic_members(geo, m, ParabolicTarget::Family(sign))?.members;
    let mut pairs = Vec::with_capacity(members.len());
    let mut qsign = None;
    for &v in &members {
        let img = quotient.project_subspace(geo.member(sign, v))?;
        let gi = qgeo
            .generator_index(&img)
            .ok_or_else(|| Error::Contradiction("projection is not a quotient generator".into()))?;
        let s = qgeo.sign(gi);
        if *qsign.get_or_insert(s) != s {
            return Err(Error::Contradiction("parabolic subspace meets both quotient families".into()));
        }
        pairs.push((v, qgeo.local_index(gi)));
    }
    let quotient_sign = qsign.unwrap_or(Sign::Plus);
    let mut images: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    images.sort_unstable();
    images.dedup();
    if images.len() != qgeo.family(quotient_sign).len() || images.len() != pairs.len() {
        return Err(Error::Contradiction("correspondence is not a bijection".into()));
    }
    let shift = m.vdim();
    let bad = pairs.par_iter().enumerate().find_any(|(i, &(a, qa))| {
        pairs[i + 1..].iter().any(|&(b, qb)| {
            let up = geo.member(sign, a).meet_vdim(geo.member(sign, b));
            let down = qgeo
                .member(quotient_sign, qa)
                .meet_vdim(qgeo.member(quotient_sign, qb));
            up != down + shift
        })
    });
    if bad.is_some() {
        return Err(Error::Contradiction("correspondence does not preserve meets".into()));
    }
    Ok(QuotientCollineation {
        m: *m,
        sign,
        quotient,
        quotient_sign,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_m_gives_identity() {
        let geo = PolarGeometry::new(4).unwrap();
        let e = SingularSubspace::empty(4);
        let p = parabolic_members(&geo, &e, ParabolicTarget::Family(Sign::Plus)).unwrap();
        assert_eq!(p.members.len(), 135);
        let c = quotient_collineation(&geo, &geo, &e, Sign::Plus).unwrap();
        assert_eq!(c.quotient_sign, Sign::Plus);
        assert!(c.pairs.iter().all(|&(a, b)| a == b));
    }

    #[test]
    fn through_a_point_in_rank_five() {
        let geo = PolarGeometry::new(5).unwrap();
        let qgeo = PolarGeometry::new(4).unwrap();
        let p = geo.model().span(&[geo.model().points()[17]]).unwrap();
        let fam = parabolic_members(&geo, &p, ParabolicTarget::Family(Sign::Minus)).unwrap();
        assert_eq!(fam.members.len(), 135);
        let dual = parabolic_members(&geo, &p, ParabolicTarget::Dual).unwrap();
        assert_eq!(dual.members.len(), 270);
        let c = quotient_collineation(&geo, &qgeo, &p, Sign::Minus).unwrap();
        assert_eq!(c.pairs.len(), 135);
        let lifted = generators_through(&geo, &p, Some(Sign::Minus)).unwrap();
        let scanned: Vec<usize> = fam.members.iter().map(|&v| geo.family(Sign::Minus)[v]).collect();
        assert_eq!(lifted, scanned);
        assert_eq!(generators_through(&geo, &p, None).unwrap(), dual.members);
    }

    #[test]
    fn dimension_out_of_range() {
        let geo = PolarGeometry::new(4).unwrap();
        let l = geo.model().span(&[1, 4]).unwrap();
        assert!(parabolic_members(&geo, &l, ParabolicTarget::Family(Sign::Plus)).is_err());
        assert!(parabolic_members(&geo, &l, ParabolicTarget::Dual).is_ok());
    }
}
