use super::form::QuadraticForm;
use super::gf2::{self, XorBasis};
use super::subspace::SingularSubspace;
use crate::{Error, Result};

/// The quotient `M^perp / M` of a totally singular `M`, with a hyperbolic basis
/// `(e_i, f_i)` so that the quotient carries the standard form of rank
/// `n - vdim(M)`.
#[derive(Clone, Debug)]
pub struct Quotient {
    form: QuadraticForm,
    m: SingularSubspace,
    e: Vec<u32>,
    f: Vec<u32>,
}

impl Quotient {
    pub fn new(form: &QuadraticForm, m: &SingularSubspace) -> Result<Self> {
        if form.radical() != 0 {
            return Err(Error::Precondition("quotients need a non-degenerate form".into()));
        }
        let n = form.rank();
        if m.vdim() == 0 {
            return Ok(Quotient {
                form: *form,
                m: *m,
                e: (0..n).map(|i| 1 << (2 * i)).collect(),
                f: (0..n).map(|i| 1 << (2 * i + 1)).collect(),
            });
        }
        let swapped: Vec<u32> = m.rows().iter().map(|&r| form.swap(r)).collect();
        let perp = gf2::kernel(&swapped, form.width());
        let mut b = XorBasis::from_vectors(m.rows().iter().copied());
        let mut w: Vec<u32> = perp.into_iter().filter(|&v| b.insert(v)).collect();
        if w.len() != 2 * (n - m.vdim()) {
            return Err(Error::Contradiction("perp has the wrong dimension".into()));
        }
        let (mut e, mut f) = (Vec::new(), Vec::new());
        while !w.is_empty() {
            let ei = gf2::span_points(&w)
                .into_iter()
                .find(|&v| !form.q(v))
                .ok_or_else(|| Error::Contradiction("quotient is anisotropic".into()))?;
            let partner = *w
                .iter()
                .find(|&&v| form.b(ei, v))
                .ok_or_else(|| Error::Contradiction("quotient form is degenerate".into()))?;
            let fi = if form.q(partner) { partner ^ ei } else { partner };
            let projected = w.iter().map(|&v| {
                let mut v = v;
                if form.b(v, fi) {
                    v ^= ei;
                }
                if form.b(v, ei) {
                    v ^= fi;
                }
                v
            });
            let mut rest = XorBasis::new();
            w = projected.filter(|&v| rest.insert(v)).collect();
            e.push(ei);
            f.push(fi);
        }
        Ok(Quotient {
            form: *form,
            m: *m,
            e,
            f,
        })
    }

    pub fn kernel(&self) -> &SingularSubspace {
        &self.m
    }

    pub fn rank(&self) -> usize {
        self.e.len()
    }

    pub fn quotient_form(&self) -> QuadraticForm {
        QuadraticForm::hyperbolic(self.rank())
    }

    /// Whether `v` lies in `M^perp`.
    pub fn in_perp(&self, v: u32) -> bool {
        self.m.rows().iter().all(|&r| !self.form.b(v, r))
    }

    /// Coordinates of the class of `v` (which must lie in `M^perp`) in the
    /// quotient's standard basis.
    #[inline]
    pub fn project(&self, v: u32) -> u32 {
        let mut out = 0;
        for i in 0..self.e.len() {
            if self.form.b(v, self.f[i]) {
                out |= 1 << (2 * i);
            }
            if self.form.b(v, self.e[i]) {
                out |= 1 << (2 * i + 1);
            }
        }
        out
    }

    /// A representative of the class with quotient coordinates `w`.
    pub fn lift(&self, w: u32) -> u32 {
        (0..self.e.len()).fold(0, |acc, i| {
            let mut acc = acc;
            if w >> (2 * i) & 1 == 1 {
                acc ^= self.e[i];
            }
            if w >> (2 * i + 1) & 1 == 1 {
                acc ^= self.f[i];
            }
            acc
        })
    }

    /// Image of a subspace containing `M`.
    pub fn project_subspace(&self, s: &SingularSubspace) -> Result<SingularSubspace> {
        if !s.contains_subspace(&self.m) {
            return Err(Error::Precondition("subspace does not contain the kernel".into()));
        }
        let v: Vec<u32> = s.rows().iter().map(|&r| self.project(r)).collect();
        SingularSubspace::span(&self.quotient_form(), &v)
    }

    /// Preimage of a quotient subspace: the subspace spanned by `M` and lifts.
    pub fn lift_subspace(&self, s: &SingularSubspace) -> Result<SingularSubspace> {
        let mut v = self.m.rows().to_vec();
        v.extend(s.rows().iter().map(|&r| self.lift(r)));
        SingularSubspace::span(&self.form, &v)
    }
}
