//! Frames, the apartments they generate, and recognition of apartments from
//! a bare set of generators.

mod frame;

use std::collections::HashMap;

use serde::Serialize;

use crate::grassmann::{generator_sign, PolarGeometry, Sign};
use crate::quadric::{QuadraticForm, Quotient, SingularSubspace};
use crate::{Error, Result};

pub use frame::{enumerate_frames, frame_from_points, is_frame, random_frame, standard_frame, Frame};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Level {
    Dual,
    HalfSpin(Sign),
}

/// Generators spanned by one point from each frame pair, with their choice
/// words rebased so that the lexicographically least member gets word 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Apartment {
    pub frame: Frame,
    pub level: Level,
    /// Generator indices for the dual level, family-local indices otherwise; increasing.
    pub members: Vec<usize>,
    /// Choice word of each member, parallel to `members`.
    pub words: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ApartmentJson {
    pub frame: Vec<String>,
    pub sigma: Vec<[usize; 2]>,
    pub level: Level,
    pub members: Vec<usize>,
}

impl Apartment {
    /// Member with choice word `w`, if present.
    pub fn member_of_word(&self, w: u32) -> Option<usize> {
        self.words.iter().position(|&x| x == w).map(|i| self.members[i])
    }

    pub fn to_json(&self) -> ApartmentJson {
        ApartmentJson {
            frame: self.frame.to_hex(),
            sigma: self.frame.sigma_pairs(),
            level: self.level,
            members: self.members.clone(),
        }
    }
}

/// The generator spanned by the frame points chosen by `word`.
pub fn frame_generator(form: &QuadraticForm, frame: &Frame, word: u32) -> Result<SingularSubspace> {
    SingularSubspace::span(form, &frame.chosen(word))
}

pub fn apartment_of(geo: &PolarGeometry, frame: &Frame, level: Level) -> Result<Apartment> {
    let n = geo.n();
    if frame.rank() != n {
        return Err(Error::InvalidParameter("frame rank differs from the geometry".into()));
    }
    if is_frame(geo.form(), &frame.points)?.is_none() {
        return Err(Error::Precondition("points do not form a frame".into()));
    }
    let mut entries: Vec<(SingularSubspace, usize, u32)> = Vec::new();
    for word in 0u32..1 << n {
        let s = frame_generator(geo.form(), frame, word)?;
        let g = geo
            .generator_index(&s)
            .ok_or_else(|| Error::Contradiction("frame span is not a generator".into()))?;
        match level {
            Level::Dual => entries.push((s, g, word)),
            Level::HalfSpin(sign) if geo.sign(g) == sign => entries.push((s, geo.local_index(g), word)),
            Level::HalfSpin(_) => {}
        }
    }
    let base = entries.iter().min_by_key(|e| e.0).map(|e| e.2).unwrap_or(0);
    entries.sort_by_key(|e| e.1);
    Ok(Apartment {
        frame: frame.clone(),
        level,
        members: entries.iter().map(|e| e.1).collect(),
        words: entries.iter().map(|e| e.2 ^ base).collect(),
    })
}

/// How many members of the frame's apartment contain each point, for every
/// point lying in some member. Works directly on subspaces, without indices.
pub fn incidence_profile(form: &QuadraticForm, frame: &Frame, family: Option<Sign>) -> Result<HashMap<u32, usize>> {
    let n = frame.rank();
    let mut counts = HashMap::new();
    for word in 0u32..1 << n {
        let s = frame_generator(form, frame, word)?;
        if family.is_some_and(|f| generator_sign(n, &s) != f) {
            continue;
        }
        for p in s.points() {
            *counts.entry(p).or_default() += 1;
        }
    }
    Ok(counts)
}

/// A positive recognition: the members form an apartment of the parabolic
/// subspace over `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recognized {
    pub m: SingularSubspace,
    /// Rank of the quotient `m^perp / m`.
    pub rank: usize,
    /// Frame of the quotient, in its standard coordinates.
    pub quotient_frame: Frame,
    /// Representatives in the ambient space of the quotient frame points.
    pub lifted_points: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Apartment(Recognized),
    NotApartment(String),
}

impl Verdict {
    pub fn is_apartment(&self) -> bool {
        matches!(self, Verdict::Apartment(_))
    }

    pub fn recognized(&self) -> Option<&Recognized> {
        match self {
            Verdict::Apartment(r) => Some(r),
            Verdict::NotApartment(_) => None,
        }
    }
}

fn not(reason: impl Into<String>) -> Result<Verdict> {
    Ok(Verdict::NotApartment(reason.into()))
}

/// Decides whether a set of generators is an apartment of a parabolic
/// subspace, half-spin (`family = Some`) or dual (`family = None`).
///
/// The members are intersected to get `M`, projected to `M^perp / M`, and
/// the quotient points lying in exactly `2^(m-2)` members (`2^(m-1)` for the
/// dual level) are taken as frame candidates. The verdict is positive iff
/// there are `2m` candidates, they form a frame, and that frame generates
/// exactly the projected members.
pub fn recognize_subspaces(form: &QuadraticForm, members: &[SingularSubspace], family: Option<Sign>) -> Result<Verdict> {
    let mut members = members.to_vec();
    members.sort_unstable();
    members.dedup();
    let size = members.len();
    if size == 0 || !size.is_power_of_two() {
        return not(format!("cardinality {size} is not a power of two"));
    }
    let log = size.trailing_zeros() as usize;
    let m_rank = if family.is_some() { log + 1 } else { log };
    if family.is_some() {
        if m_rank % 2 != 0 {
            return not(format!("unsupported rank parity: m = {m_rank}"));
        }
        if m_rank < 4 {
            return not(format!("rank m = {m_rank} is below 4"));
        }
    }
    if m_rank == 0 {
        return not("a single generator is not an apartment of positive rank");
    }
    let n = form.rank();
    let common = members[1..]
        .iter()
        .fold(members[0], |acc, s| acc.intersection(s));
    if n - common.vdim() != m_rank {
        return not(format!(
            "common subspace has pdim {}, expected {}",
            common.pdim(),
            n as i32 - m_rank as i32 - 1
        ));
    }
    let q = Quotient::new(form, &common)?;
    let projected: Vec<SingularSubspace> = members
        .iter()
        .map(|s| q.project_subspace(s))
        .collect::<Result<_>>()?;
    let qsign = match family {
        Some(_) => {
            let s0 = generator_sign(m_rank, &projected[0]);
            if projected.iter().any(|p| generator_sign(m_rank, p) != s0) {
                return not("members project to both quotient families");
            }
            Some(s0)
        }
        None => None,
    };

    let mut counts: HashMap<u32, usize> = HashMap::new();
    for s in &projected {
        for p in s.points() {
            *counts.entry(p).or_default() += 1;
        }
    }
    let target = if family.is_some() { 1 << (m_rank - 2) } else { 1 << (m_rank - 1) };
    let mut cands: Vec<u32> = counts
        .into_iter()
        .filter(|&(_, c)| c == target)
        .map(|(p, _)| p)
        .collect();
    cands.sort_unstable();
    if cands.len() != 2 * m_rank {
        return not(format!(
            "{} points lie in exactly {target} members, expected {}",
            cands.len(),
            2 * m_rank
        ));
    }
    let qform = q.quotient_form();
    let Some(frame) = frame_from_points(&qform, &cands)? else {
        return not("candidate points do not form a frame");
    };
    let mut generated = Vec::new();
    for word in 0u32..1 << m_rank {
        let s = frame_generator(&qform, &frame, word)?;
        if qsign.is_none() || qsign == Some(generator_sign(m_rank, &s)) {
            generated.push(s);
        }
    }
    generated.sort_unstable();
    let mut sorted_proj = projected.clone();
    sorted_proj.sort_unstable();
    if generated != sorted_proj {
        return not("candidate frame generates a different member set");
    }
    let lifted_points = frame.points.iter().map(|&p| q.lift(p)).collect();
    Ok(Verdict::Apartment(Recognized {
        m: common,
        rank: m_rank,
        quotient_frame: frame,
        lifted_points,
    }))
}

/// Half-spin recognition on family-local indices.
pub fn recognize_apartment(geo: &PolarGeometry, sign: Sign, members: &[usize]) -> Result<Verdict> {
    let subs: Vec<SingularSubspace> = members.iter().map(|&v| *geo.member(sign, v)).collect();
    recognize_subspaces(geo.form(), &subs, Some(sign))
}

/// Dual recognition on generator indices.
pub fn recognize_dual_apartment(geo: &PolarGeometry, members: &[usize]) -> Result<Verdict> {
    let subs: Vec<SingularSubspace> = members.iter().map(|&g| *geo.generator(g)).collect();
    recognize_subspaces(geo.form(), &subs, None)
}

impl Recognized {
    /// Members regenerated from the recovered frame, as subspaces of the ambient space.
    pub fn regenerate(&self, form: &QuadraticForm, family: Option<Sign>) -> Result<Vec<SingularSubspace>> {
        let mut out = Vec::new();
        for word in 0u32..1 << self.rank {
            let mut v = self.m.rows().to_vec();
            v.extend((0..self.rank).map(|j| self.lifted_points[2 * j + (word >> j & 1) as usize]));
            let s = SingularSubspace::span(form, &v)?;
            if family.is_none_or(|f| generator_sign(form.rank(), &s) == f) {
                out.push(s);
            }
        }
        out.sort_unstable();
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphcore::{build_halfcube, build_hypercube};
    use crate::grassmann::build_halfspin_graph;

    #[test]
    fn standard_apartments_n4() {
        let geo = PolarGeometry::new(4).unwrap();
        let f = standard_frame(4).unwrap();
        let dual = apartment_of(&geo, &f, Level::Dual).unwrap();
        assert_eq!(dual.members.len(), 16);
        let cube = build_hypercube(4).unwrap();
        for (i, &a) in dual.members.iter().enumerate() {
            for (j, &b) in dual.members.iter().enumerate() {
                let d = geo.dual_distance(geo.generator(a), geo.generator(b));
                let wa = dual.words[i];
                let wb = dual.words[j];
                assert_eq!(d, (wa ^ wb).count_ones());
                assert_eq!(d == 1, cube.is_adjacent(wa as usize, wb as usize));
            }
        }
        let half = build_halfcube(4).unwrap();
        let hs = build_halfspin_graph(&geo, Sign::Plus).unwrap();
        let ap = apartment_of(&geo, &f, Level::HalfSpin(Sign::Plus)).unwrap();
        assert_eq!(ap.members.len(), 8);
        assert!(ap.words.contains(&0));
        for (i, &a) in ap.members.iter().enumerate() {
            for (j, &b) in ap.members.iter().enumerate() {
                let (wa, wb) = (ap.words[i], ap.words[j]);
                assert_eq!(wa.count_ones() % 2, 0);
                let va = (wa >> 1) as usize;
                let vb = (wb >> 1) as usize;
                assert_eq!(hs.graph.is_adjacent(a, b), half.is_adjacent(va, vb));
            }
        }
    }

    #[test]
    fn frame_points_lie_in_a_quarter_of_the_members() {
        let form = QuadraticForm::hyperbolic(4);
        let f = standard_frame(4).unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            let prof = incidence_profile(&form, &f, Some(sign)).unwrap();
            for &p in &f.points {
                assert_eq!(prof[&p], 4);
            }
            assert_eq!(prof.values().filter(|&&c| c == 4).count(), 8);
        }
    }

    #[test]
    fn round_trip_and_negative_control() {
        let geo = PolarGeometry::new(4).unwrap();
        for seed in 0..5 {
            let f = random_frame(geo.model(), seed);
            let ap = apartment_of(&geo, &f, Level::HalfSpin(Sign::Minus)).unwrap();
            let v = recognize_apartment(&geo, Sign::Minus, &ap.members).unwrap();
            let r = v.recognized().expect("apartment recognised");
            assert_eq!(r.m.pdim(), -1);
            assert_eq!(r.quotient_frame.point_set(), f.point_set());

            let mut bad = ap.members.clone();
            let outsider = (0..135).find(|x| !bad.contains(x)).unwrap();
            bad[3] = outsider;
            assert!(!recognize_apartment(&geo, Sign::Minus, &bad).unwrap().is_apartment());

            let dual = apartment_of(&geo, &f, Level::Dual).unwrap();
            assert!(recognize_dual_apartment(&geo, &dual.members).unwrap().is_apartment());
        }
        let v = recognize_apartment(&geo, Sign::Plus, &[0, 1, 2]).unwrap();
        assert!(matches!(v, Verdict::NotApartment(ref s) if s.contains("power of two")));
    }

    #[test]
    fn parabolic_apartment_in_rank_five() {
        let geo = PolarGeometry::new(5).unwrap();
        // an apartment of [e1>: the frame pair (e1, e2) is fixed to e1
        let f = standard_frame(5).unwrap();
        let sign = Sign::Plus;
        let members: Vec<usize> = (0u32..32)
            .filter(|w| w & 1 == 0)
            .filter_map(|w| {
                let s = frame_generator(geo.form(), &f, w).unwrap();
                geo.member_index(sign, &s)
            })
            .collect();
        assert_eq!(members.len(), 8);
        let v = recognize_apartment(&geo, sign, &members).unwrap();
        let r = v.recognized().unwrap();
        assert_eq!(r.m.pdim(), 0);
        assert_eq!(r.rank, 4);
        let mut subs: Vec<SingularSubspace> = members.iter().map(|&v| *geo.member(sign, v)).collect();
        subs.sort_unstable();
        assert_eq!(r.regenerate(geo.form(), Some(sign)).unwrap(), subs);
    }

    #[test]
    fn odd_rank_is_unsupported() {
        let geo = PolarGeometry::new(5).unwrap();
        let f = standard_frame(5).unwrap();
        let ap = apartment_of(&geo, &f, Level::HalfSpin(Sign::Plus)).unwrap();
        let v = recognize_apartment(&geo, Sign::Plus, &ap.members).unwrap();
        assert!(matches!(v, Verdict::NotApartment(ref s) if s.contains("parity")));
    }
}
