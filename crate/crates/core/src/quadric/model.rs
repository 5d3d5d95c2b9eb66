use std::collections::HashMap;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use super::form::QuadraticForm;
use super::subspace::SingularSubspace;
use crate::graphcore::BitMatrix;
use crate::{Error, Result};

/// Size limits for model construction and subspace enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    /// Largest ambient vector width; points are found by scanning all vectors.
    pub max_width: u32,
    /// Largest number of subspaces an enumeration may produce.
    pub max_subspaces: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_width: 22,
            max_subspaces: 2_000_000,
        }
    }
}

/// Number of totally singular subspaces of vector dimension `r` for the
/// hyperbolic form of rank `n` over GF(2).
pub fn singular_subspace_count(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    // Gaussian binomial [n, r]_2 times prod_{i=n-r}^{n-1} (2^i + 1)
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..r {
        num *= (1u128 << (n - i)) - 1;
        den *= (1u128 << (i + 1)) - 1;
    }
    let mut c = num / den;
    for i in n - r..n {
        c *= (1u128 << i) + 1;
    }
    c
}

/// Which algorithm enumerates singular subspaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Route {
    /// Level by level: every subspace of the previous level plus one orthogonal point.
    Extension,
    /// Depth-first over reduced echelon matrices, pruning rows that break singularity.
    Echelon,
    /// Every reduced echelon matrix of the right shape, filtered at the end.
    BruteForce,
}

/// Singular points of a quadratic form with their collinearity relation.
#[derive(Debug)]
pub struct PolarSpaceModel {
    form: QuadraticForm,
    budget: Budget,
    points: Vec<u32>,
    index: Vec<u32>,
    collinearity: OnceLock<BitMatrix>,
}

impl PolarSpaceModel {
    pub fn hyperbolic(n: usize) -> Result<Self> {
        Self::build(QuadraticForm::hyperbolic(n), Budget::default())
    }

    pub fn build(form: QuadraticForm, budget: Budget) -> Result<Self> {
        if form.rank() < 1 {
            return Err(Error::InvalidParameter("rank must be at least 1".into()));
        }
        let w = form.width();
        if w > budget.max_width {
            return Err(Error::Budget {
                what: "vector width".into(),
                needed: w as u64,
                limit: budget.max_width as u64,
            });
        }
        let points: Vec<u32> = (1u32..1 << w).filter(|&x| !form.q(x)).collect();
        let mut index = vec![u32::MAX; 1 << w];
        for (i, &p) in points.iter().enumerate() {
            index[p as usize] = i as u32;
        }
        Ok(PolarSpaceModel {
            form,
            budget,
            points,
            index,
            collinearity: OnceLock::new(),
        })
    }

    pub fn form(&self) -> &QuadraticForm {
        &self.form
    }

    pub fn rank(&self) -> usize {
        self.form.rank()
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    /// Vector dimension of the generators.
    pub fn generator_vdim(&self) -> usize {
        self.form.rank() + self.form.radical()
    }

    /// Singular points in increasing order.
    pub fn points(&self) -> &[u32] {
        &self.points
    }

    #[inline]
    pub fn point_index(&self, v: u32) -> Option<usize> {
        match self.index.get(v as usize) {
            Some(&i) if i != u32::MAX => Some(i as usize),
            _ => None,
        }
    }

    /// Distinct points are collinear iff they are orthogonal.
    #[inline]
    pub fn collinear(&self, p: u32, q: u32) -> bool {
        !self.form.b(p, q)
    }

    /// Dense collinearity relation on point indices (reflexive).
    pub fn collinearity(&self) -> &BitMatrix {
        self.collinearity.get_or_init(|| {
            let n = self.points.len();
            let rows: Vec<Vec<u64>> = self
                .points
                .par_iter()
                .map(|&p| {
                    let mut row = vec![0u64; n.div_ceil(64)];
                    for (j, &q) in self.points.iter().enumerate() {
                        if !self.form.b(p, q) {
                            row[j >> 6] |= 1 << (j & 63);
                        }
                    }
                    row
                })
                .collect();
            BitMatrix::from_rows(n, rows)
        })
    }

    pub fn span(&self, vectors: &[u32]) -> Result<SingularSubspace> {
        SingularSubspace::span(&self.form, vectors)
    }

    /// Singular points orthogonal to every vector of `s`.
    pub fn perp_points(&self, s: &[u32]) -> Vec<u32> {
        let sw: Vec<u32> = s.iter().map(|&r| self.form.swap(r)).collect();
        self.points
            .iter()
            .copied()
            .filter(|&p| sw.iter().all(|&r| (p & r).count_ones() & 1 == 0))
            .collect()
    }

    /// The two parts of the orthogonality lemma, each as an implication that
    /// holds vacuously when its hypothesis fails:
    /// 1. `p` orthogonal to every point of `xs` implies `p` orthogonal to every
    ///    singular point of the span of `xs`;
    /// 2. if `xs` spans a generator and `p` is orthogonal to it, then `p` lies in it.
    pub fn perp_tests(&self, p: u32, xs: &[u32]) -> (bool, bool) {
        let perp_all = xs.iter().all(|&x| !self.form.b(p, x));
        let rows = super::gf2::XorBasis::from_vectors(xs.iter().copied()).canonical_rows();
        let first = !perp_all
            || super::gf2::span_points(&rows)
                .into_iter()
                .filter(|&v| !self.form.q(v))
                .all(|v| !self.form.b(p, v));
        let second = match self.span(xs) {
            Ok(s) if s.vdim() == self.generator_vdim() => {
                let perp_s = s.rows().iter().all(|&r| !self.form.b(p, r));
                !perp_s || s.contains(p)
            }
            _ => true,
        };
        (first, second)
    }

    fn check_count(&self, r: usize) -> Result<()> {
        if self.form.radical() > 0 {
            return Ok(());
        }
        let needed = singular_subspace_count(self.rank(), r);
        if needed > self.budget.max_subspaces as u128 {
            return Err(Error::Budget {
                what: format!("singular subspaces of vector dimension {r}"),
                needed: needed.min(u64::MAX as u128) as u64,
                limit: self.budget.max_subspaces,
            });
        }
        Ok(())
    }

    fn check_pdim(&self, k: i32) -> Result<usize> {
        if k < -1 || k >= self.generator_vdim() as i32 {
            return Err(Error::InvalidParameter(format!(
                "projective dimension {k} out of range -1..={}",
                self.generator_vdim() as i32 - 1
            )));
        }
        Ok((k + 1) as usize)
    }

    /// All singular subspaces of projective dimension `k`, sorted, built by extension.
    pub fn enumerate_singular_subspaces(&self, k: i32) -> Result<Vec<SingularSubspace>> {
        self.enumerate_with(k, Route::Extension)
    }

    pub fn enumerate_with(&self, k: i32, route: Route) -> Result<Vec<SingularSubspace>> {
        let r = self.check_pdim(k)?;
        // the extension route materialises every lower level as well
        let lowest = if route == Route::Extension { 0 } else { r };
        for level in lowest..=r {
            self.check_count(level)?;
        }
        match route {
            Route::Extension => Ok(self.by_extension(r)),
            Route::Echelon => Ok(self.by_echelon(r, true)),
            Route::BruteForce => Ok(self.by_echelon(r, false)),
        }
    }

    pub fn generators(&self) -> Result<Vec<SingularSubspace>> {
        self.enumerate_with(self.generator_vdim() as i32 - 1, Route::Extension)
    }

    fn by_extension(&self, r: usize) -> Vec<SingularSubspace> {
        let mut level = vec![SingularSubspace::empty(self.rank())];
        for _ in 0..r {
            let mut next: Vec<SingularSubspace> = level
                .par_iter()
                .flat_map_iter(|s| {
                    let sw: Vec<u32> = s.rows().iter().map(|&x| self.form.swap(x)).collect();
                    self.points
                        .iter()
                        .copied()
                        .filter(move |&p| {
                            // one representative per coset p + S, which also excludes p in S
                            sw.iter().all(|&x| (p & x).count_ones() & 1 == 0) && s.reduce(p) == p
                        })
                        .map(move |p| s.extend_unchecked(p))
                })
                .collect();
            next.par_sort_unstable();
            next.dedup();
            level = next;
        }
        level
    }

    fn by_echelon(&self, r: usize, prune: bool) -> Vec<SingularSubspace> {
        let w = self.form.width();
        let mut out = Vec::new();
        let mut rows = Vec::with_capacity(r);
        self.echelon_dfs(w, r, prune, 0, 0, &mut rows, &mut out);
        out.par_sort_unstable();
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn echelon_dfs(
        &self,
        w: u32,
        r: usize,
        prune: bool,
        next_pivot: u32,
        pivots: u32,
        rows: &mut Vec<u32>,
        out: &mut Vec<SingularSubspace>,
    ) {
        if rows.len() == r {
            if !prune {
                for (i, &a) in rows.iter().enumerate() {
                    if self.form.q(a) || rows[i + 1..].iter().any(|&b| self.form.b(a, b)) {
                        return;
                    }
                }
            }
            let canon: Vec<u32> = rows.iter().rev().copied().collect();
            out.push(SingularSubspace::from_canonical(self.rank(), &canon).expect("rank bounded"));
            return;
        }
        let left = (r - rows.len()) as u32;
        // rows are chosen with increasing pivots; a row may use any lower
        // position that is not already a pivot
        for p in next_pivot..=w - left {
            let free = ((1u32 << p) - 1) & !pivots;
            let nfree = free.count_ones();
            for sub in 0u32..1 << nfree {
                let row = (1 << p) | deposit(sub, free);
                if prune && (self.form.q(row) || rows.iter().any(|&b| self.form.b(row, b))) {
                    continue;
                }
                rows.push(row);
                self.echelon_dfs(w, r, prune, p + 1, pivots | 1 << p, rows, out);
                rows.pop();
            }
        }
    }
}

/// Scatters the low bits of `x` into the set positions of `mask`.
fn deposit(mut x: u32, mut mask: u32) -> u32 {
    let mut out = 0;
    while mask != 0 && x != 0 {
        let low = mask & mask.wrapping_neg();
        if x & 1 == 1 {
            out |= low;
        }
        x >>= 1;
        mask &= mask - 1;
    }
    out
}

/// Outcome of the exhaustive axiom check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub n: usize,
    pub radical: usize,
    pub points: usize,
    pub lines: usize,
    /// Every line has at least three points (and collinear pairs close to a line).
    pub thick_lines: bool,
    /// No point is collinear with all points.
    pub no_universal_point: bool,
    pub universal_point: Option<String>,
    /// A point is collinear with one or all points of each line.
    pub one_or_all: bool,
    pub one_or_all_violations: u64,
    /// Finite rank: every chain of singular subspaces is finite. Holds by construction.
    pub finite_rank: bool,
    /// Number of subspaces of codimension one in a generator.
    pub next_to_maximal: usize,
    /// Histogram `generators through a next-to-maximal subspace -> how many subspaces`.
    pub generators_through: Vec<(usize, usize)>,
    /// Every next-to-maximal subspace lies in exactly two generators.
    pub d_type: bool,
    pub passed: bool,
}

pub fn verify_bs_axioms(model: &PolarSpaceModel) -> Result<AxiomReport> {
    let form = model.form();
    let pts = model.points();
    let lines = model.enumerate_singular_subspaces(1)?;

    let thick_lines = lines.iter().all(|l| l.points().len() >= 3)
        && pts.par_iter().all(|&p| {
            pts.iter()
                .all(|&q| p == q || form.b(p, q) || model.point_index(p ^ q).is_some())
        });

    let universal = pts
        .par_iter()
        .find_first(|&&p| pts.iter().all(|&q| !form.b(p, q)))
        .copied();

    let one_or_all_violations: u64 = pts
        .par_iter()
        .map(|&p| {
            lines
                .iter()
                .filter(|l| {
                    let c = l.points().iter().filter(|&&x| !form.b(p, x)).count();
                    c != 1 && c != 3
                })
                .count() as u64
        })
        .sum();

    let gens = model.generators()?;
    let mut tally: HashMap<SingularSubspace, usize> = HashMap::new();
    for g in &gens {
        for h in g.hyperplanes() {
            *tally.entry(h).or_default() += 1;
        }
    }
    let next = model.enumerate_singular_subspaces(model.generator_vdim() as i32 - 2)?;
    let mut hist: HashMap<usize, usize> = HashMap::new();
    for s in &next {
        *hist.entry(tally.get(s).copied().unwrap_or(0)).or_default() += 1;
    }
    let mut generators_through: Vec<(usize, usize)> = hist.into_iter().collect();
    generators_through.sort_unstable();
    let d_type = tally.len() == next.len() && generators_through == vec![(2, next.len())];

    let no_universal_point = universal.is_none();
    let one_or_all = one_or_all_violations == 0;
    Ok(AxiomReport {
        n: model.rank(),
        radical: form.radical(),
        points: pts.len(),
        lines: lines.len(),
        thick_lines,
        no_universal_point,
        universal_point: universal.map(|p| format!("{p:#x}")),
        one_or_all,
        one_or_all_violations,
        finite_rank: true,
        next_to_maximal: next.len(),
        generators_through,
        d_type,
        passed: thick_lines && no_universal_point && one_or_all && d_type,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_counts() {
        for (n, want) in [(2, 9), (3, 35), (4, 135), (5, 527)] {
            let m = PolarSpaceModel::hyperbolic(n).unwrap();
            assert_eq!(m.points().len(), want);
            assert_eq!(singular_subspace_count(n, 1), want as u128);
        }
    }

    #[test]
    fn deposit_scatters() {
        assert_eq!(deposit(0b11, 0b1010), 0b1010);
        assert_eq!(deposit(0b10, 0b1010), 0b1000);
        assert_eq!(deposit(0, 0b1010), 0);
    }

    #[test]
    fn routes_agree_small() {
        for n in 2..=3 {
            let m = PolarSpaceModel::hyperbolic(n).unwrap();
            for k in -1..n as i32 {
                let a = m.enumerate_with(k, Route::Extension).unwrap();
                let b = m.enumerate_with(k, Route::Echelon).unwrap();
                let c = m.enumerate_with(k, Route::BruteForce).unwrap();
                assert_eq!(a, b, "n={n} k={k}");
                assert_eq!(a, c, "n={n} k={k}");
                assert_eq!(a.len() as u128, singular_subspace_count(n, (k + 1) as usize));
            }
        }
    }

    #[test]
    fn n2_lines() {
        let m = PolarSpaceModel::hyperbolic(2).unwrap();
        assert_eq!(m.enumerate_singular_subspaces(1).unwrap().len(), 6);
    }

    #[test]
    fn pdim_out_of_range() {
        let m = PolarSpaceModel::hyperbolic(3).unwrap();
        assert!(m.enumerate_singular_subspaces(3).is_err());
        assert!(m.enumerate_singular_subspaces(-2).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let b = Budget {
            max_width: 22,
            max_subspaces: 100,
        };
        let m = PolarSpaceModel::build(QuadraticForm::hyperbolic(4), b).unwrap();
        assert!(m.generators().unwrap_err().is_budget());
        assert!(PolarSpaceModel::hyperbolic(12).unwrap_err().is_budget());
    }

    #[test]
    fn axioms_hold_n3() {
        let m = PolarSpaceModel::hyperbolic(3).unwrap();
        let r = verify_bs_axioms(&m).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.next_to_maximal, 105);
    }

    #[test]
    fn radical_breaks_axiom_two() {
        let m = PolarSpaceModel::build(QuadraticForm::with_radical(2, 1), Budget::default()).unwrap();
        let r = verify_bs_axioms(&m).unwrap();
        assert!(!r.no_universal_point);
        assert_eq!(r.universal_point.as_deref(), Some("0x10"));
        assert!(!r.passed);
    }

    #[test]
    fn perp_lemma_examples() {
        let m = PolarSpaceModel::hyperbolic(4).unwrap();
        // e1 + e3 is orthogonal to e1 and e3
        assert_eq!(m.perp_tests(0b101, &[0b1, 0b100]), (true, true));
        let g = m.generators().unwrap()[0];
        for &p in m.points() {
            assert_eq!(m.perp_tests(p, g.rows()), (true, true));
        }
    }
}
