use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use super::form::QuadraticForm;
use super::gf2::{self, XorBasis};
use crate::{Error, Result};

/// Largest vector dimension a subspace can have.
pub const MAX_VDIM: usize = 16;

/// A totally singular subspace, stored as its reduced echelon basis with rows
/// ordered by decreasing pivot. Two subspaces are equal iff their stored rows are.
///
/// Dimensions are projective: `pdim = rows - 1`, the zero subspace has `pdim = -1`.
#[derive(Clone, Copy)]
pub struct SingularSubspace {
    n: u8,
    len: u8,
    rows: [u32; MAX_VDIM],
}

impl SingularSubspace {
    pub fn empty(n: usize) -> Self {
        SingularSubspace {
            n: n as u8,
            len: 0,
            rows: [0; MAX_VDIM],
        }
    }

    /// Span of `vectors`, which must be totally singular for `form`.
    pub fn span(form: &QuadraticForm, vectors: &[u32]) -> Result<Self> {
        let basis = XorBasis::from_vectors(vectors.iter().copied());
        let rows = basis.canonical_rows();
        // Q on a sum is the sum of Q plus the pairwise polar terms, so checking
        // the basis is enough
        for (i, &a) in rows.iter().enumerate() {
            if form.q(a) || rows[i + 1..].iter().any(|&b| form.b(a, b)) {
                return Err(Error::NotTotallySingular);
            }
        }
        Self::from_canonical(form.rank(), &rows)
    }

    /// Wraps rows already in canonical form; only the length is checked.
    pub fn from_canonical(n: usize, rows: &[u32]) -> Result<Self> {
        if rows.len() > MAX_VDIM {
            return Err(Error::InvalidParameter(format!(
                "{} rows exceed the supported dimension",
                rows.len()
            )));
        }
        let mut s = Self::empty(n);
        s.rows[..rows.len()].copy_from_slice(rows);
        s.len = rows.len() as u8;
        Ok(s)
    }

    /// Canonicalises an arbitrary spanning list without checking singularity.
    pub fn from_vectors_unchecked(n: usize, vectors: &[u32]) -> Self {
        let rows = XorBasis::from_vectors(vectors.iter().copied()).canonical_rows();
        Self::from_canonical(n, &rows).expect("rank bounded by caller")
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows[..self.len as usize]
    }

    pub fn vdim(&self) -> usize {
        self.len as usize
    }

    pub fn pdim(&self) -> i32 {
        self.len as i32 - 1
    }

    #[inline]
    pub fn reduce(&self, mut v: u32) -> u32 {
        for &r in self.rows() {
            let p = 31 - r.leading_zeros();
            if v >> p & 1 == 1 {
                v ^= r;
            }
        }
        v
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        self.reduce(v) == 0
    }

    pub fn contains_subspace(&self, other: &SingularSubspace) -> bool {
        other.rows().iter().all(|&r| self.contains(r))
    }

    /// Projective points, increasing.
    pub fn points(&self) -> Vec<u32> {
        gf2::span_points(self.rows())
    }

    fn basis(&self) -> XorBasis {
        XorBasis::from_vectors(self.rows().iter().copied())
    }

    /// Vector dimension of the intersection with `other`.
    #[inline]
    pub fn meet_vdim(&self, other: &SingularSubspace) -> usize {
        let mut b = self.basis();
        let extra = other.rows().iter().filter(|&&r| b.insert(r)).count();
        other.vdim() - extra
    }

    pub fn intersection(&self, other: &SingularSubspace) -> SingularSubspace {
        let v = gf2::intersection(self.rows(), other.rows());
        Self::from_vectors_unchecked(self.n(), &v)
    }

    /// Span of both; fails if the result is not totally singular.
    pub fn join(&self, other: &SingularSubspace, form: &QuadraticForm) -> Result<SingularSubspace> {
        let mut v = self.rows().to_vec();
        v.extend_from_slice(other.rows());
        Self::span(form, &v)
    }

    /// `S + <p>` for a singular `p` orthogonal to `S`; not checked.
    pub fn extend_unchecked(&self, p: u32) -> SingularSubspace {
        let mut v = self.rows().to_vec();
        v.push(p);
        Self::from_vectors_unchecked(self.n(), &v)
    }

    /// All subspaces of codimension one.
    pub fn hyperplanes(&self) -> Vec<SingularSubspace> {
        // hyperplanes are kernels of nonzero functionals on the row coordinates
        let k = self.vdim();
        let rows = self.rows();
        let mut out: Vec<SingularSubspace> = (1u32..1 << k)
            .map(|func| {
                let basis: Vec<u32> = gf2::kernel(&[func], k as u32)
                    .into_iter()
                    .map(|c| {
                        (0..k)
                            .filter(|&i| c >> i & 1 == 1)
                            .fold(0, |a, i| a ^ rows[i])
                    })
                    .collect();
                Self::from_vectors_unchecked(self.n(), &basis)
            })
            .collect();
        out.sort();
        out
    }

    /// Serialisable form: `n`, `pdim` and the basis rows in hex.
    pub fn to_json(&self) -> SubspaceJson {
        SubspaceJson {
            n: self.n(),
            pdim: self.pdim(),
            basis: self.rows().iter().map(|r| format!("{r:#x}")).collect(),
        }
    }

    pub fn from_json(form: &QuadraticForm, j: &SubspaceJson) -> Result<Self> {
        let rows = j
            .basis
            .iter()
            .map(|h| {
                u32::from_str_radix(h.trim_start_matches("0x"), 16)
                    .map_err(|e| Error::InvalidParameter(format!("bad basis row {h}: {e}")))
            })
            .collect::<Result<Vec<u32>>>()?;
        let s = Self::span(form, &rows)?;
        if s.pdim() != j.pdim || s.rows() != rows.as_slice() {
            return Err(Error::InvalidParameter("basis is not canonical".into()));
        }
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceJson {
    pub n: usize,
    pub pdim: i32,
    pub basis: Vec<String>,
}

impl PartialEq for SingularSubspace {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.rows() == other.rows()
    }
}

impl Eq for SingularSubspace {}

impl Hash for SingularSubspace {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.n.hash(state);
        self.rows().hash(state);
    }
}

impl Ord for SingularSubspace {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.rows().cmp(other.rows()))
    }
}

impl PartialOrd for SingularSubspace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for SingularSubspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, r) in self.rows().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r:0w$b}", w = 2 * self.n())?;
        }
        write!(f, ">")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn span_examples() {
        let f = QuadraticForm::hyperbolic(4);
        let e = SingularSubspace::span(&f, &[]).unwrap();
        assert_eq!(e.pdim(), -1);
        let line = SingularSubspace::span(&f, &[0b1, 0b100]).unwrap();
        assert_eq!(line.pdim(), 1);
        assert_eq!(line.points(), vec![0b1, 0b100, 0b101]);
        assert_eq!(
            SingularSubspace::span(&f, &[0b1, 0b10]),
            Err(Error::NotTotallySingular)
        );
    }

    #[test]
    fn json_round_trip() {
        let f = QuadraticForm::hyperbolic(4);
        let s = SingularSubspace::span(&f, &[0b101, 0b10000]).unwrap();
        let j = s.to_json();
        assert_eq!(j.basis, vec!["0x10", "0x5"]);
        assert_eq!(SingularSubspace::from_json(&f, &j).unwrap(), s);
    }

    #[test]
    fn hyperplanes_of_a_plane() {
        let f = QuadraticForm::hyperbolic(4);
        let s = SingularSubspace::span(&f, &[1, 4, 16]).unwrap();
        let h = s.hyperplanes();
        assert_eq!(h.len(), 7);
        assert!(h.iter().all(|l| l.pdim() == 1 && s.contains_subspace(l)));
    }

    proptest! {
        #[test]
        fn canonical_identity(a in 0u32..256, b in 0u32..256, c in 0u32..256) {
            let s = SingularSubspace::from_vectors_unchecked(4, &[a, b, c]);
            let t = SingularSubspace::from_vectors_unchecked(4, &[c ^ a, b, a]);
            prop_assert_eq!(s, t);
            prop_assert_eq!(SingularSubspace::from_vectors_unchecked(4, s.rows()), s);
        }

        #[test]
        fn meet_matches_intersection(a in proptest::collection::vec(0u32..256, 0..4),
                                     b in proptest::collection::vec(0u32..256, 0..4)) {
            let s = SingularSubspace::from_vectors_unchecked(4, &a);
            let t = SingularSubspace::from_vectors_unchecked(4, &b);
            let i = s.intersection(&t);
            prop_assert_eq!(s.meet_vdim(&t), i.vdim());
            prop_assert!(s.contains_subspace(&i) && t.contains_subspace(&i));
        }
    }
}
