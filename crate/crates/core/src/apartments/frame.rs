use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::quadric::{gf2, PolarSpaceModel, QuadraticForm};
use crate::{Error, Result};

/// `2n` singular points in `n` pairs. Within a pair the points are not
/// orthogonal; points of different pairs are.
///
/// Points are stored pair by pair: `points[2j]` and `points[2j + 1]` are pair
/// `j`, and bit `j` of a choice word selects which of the two is taken.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Frame {
    pub points: Vec<u32>,
}

impl Frame {
    pub fn rank(&self) -> usize {
        self.points.len() / 2
    }

    /// Index of the partner of point `i`.
    pub fn sigma(&self, i: usize) -> usize {
        i ^ 1
    }

    pub fn sigma_pairs(&self) -> Vec<[usize; 2]> {
        (0..self.rank()).map(|j| [2 * j, 2 * j + 1]).collect()
    }

    /// Points selected by a choice word.
    pub fn chosen(&self, word: u32) -> Vec<u32> {
        (0..self.rank())
            .map(|j| self.points[2 * j + (word >> j & 1) as usize])
            .collect()
    }

    /// Same frame with pairs ordered by their smaller point and each pair
    /// written smaller point first.
    pub fn canonical(&self) -> Frame {
        let mut pairs: Vec<[u32; 2]> = self
            .points
            .chunks(2)
            .map(|c| [c[0].min(c[1]), c[0].max(c[1])])
            .collect();
        pairs.sort_unstable();
        Frame {
            points: pairs.concat(),
        }
    }

    /// Points as a sorted set.
    pub fn point_set(&self) -> Vec<u32> {
        let mut v = self.points.clone();
        v.sort_unstable();
        v
    }

    pub fn to_hex(&self) -> Vec<String> {
        self.points.iter().map(|p| format!("{p:#x}")).collect()
    }
}

/// `(e1, e2), (e3, e4), ...`.
pub fn standard_frame(n: usize) -> Result<Frame> {
    if !(2..=16).contains(&n) {
        return Err(Error::InvalidParameter(format!("rank {n} outside 2..=16")));
    }
    Ok(Frame {
        points: (0..2 * n).map(|k| 1u32 << k).collect(),
    })
}

/// Frame check for `2n` points. Returns the partner of each point when
/// every point has exactly one non-orthogonal partner, `None` otherwise.
pub fn is_frame(form: &QuadraticForm, points: &[u32]) -> Result<Option<Vec<usize>>> {
    let n = form.rank();
    if points.len() != 2 * n {
        return Err(Error::InvalidParameter(format!(
            "a frame has {} points, got {}",
            2 * n,
            points.len()
        )));
    }
    let mut sorted = points.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != points.len() || points.iter().any(|&p| p == 0 || form.q(p)) {
        return Err(Error::InvalidParameter("frame points must be distinct singular points".into()));
    }
    let mut sigma = Vec::with_capacity(points.len());
    for (i, &p) in points.iter().enumerate() {
        let partners: Vec<usize> = (0..points.len())
            .filter(|&j| j != i && form.b(p, points[j]))
            .collect();
        if partners.len() != 1 {
            return Ok(None);
        }
        sigma.push(partners[0]);
    }
    if gf2::rank(points) != points.len() {
        return Ok(None);
    }
    Ok(Some(sigma))
}

/// Reorders valid frame points into pair layout.
pub fn frame_from_points(form: &QuadraticForm, points: &[u32]) -> Result<Option<Frame>> {
    let Some(sigma) = is_frame(form, points)? else {
        return Ok(None);
    };
    let mut out = Vec::with_capacity(points.len());
    for (i, &s) in sigma.iter().enumerate() {
        if i < s {
            out.push(points[i]);
            out.push(points[s]);
        }
    }
    Ok(Some(Frame { points: out }.canonical()))
}

/// A frame built pair by pair inside the shrinking orthogonal complement,
/// with every choice drawn from a ChaCha8 stream seeded by `seed`.
pub fn random_frame(model: &PolarSpaceModel, seed: u64) -> Frame {
    let form = model.form();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<u32> = Vec::new();
    for _ in 0..model.rank() {
        let cands = model.perp_points(&chosen);
        let p = *cands.choose(&mut rng).expect("non-degenerate complement has points");
        let partners: Vec<u32> = cands.iter().copied().filter(|&q| form.b(p, q)).collect();
        let q = *partners.choose(&mut rng).expect("non-degenerate complement");
        chosen.push(p);
        chosen.push(q);
    }
    Frame { points: chosen }
}

/// Every frame, each once, in canonical form and sorted.
///
/// Pairs are listed by increasing smaller point, so the smaller points grow
/// along the search and each pair's larger point exceeds its smaller one.
pub fn enumerate_frames(model: &PolarSpaceModel) -> Vec<Frame> {
    let pts = model.points();
    let form = *model.form();
    let n = model.rank();
    let mut out: Vec<Frame> = pts
        .par_iter()
        .flat_map_iter(|&p| {
            let mut local = Vec::new();
            let mut chosen = Vec::with_capacity(2 * n);
            let perp: Vec<u32> = pts.iter().copied().filter(|&x| x > p).collect();
            frame_dfs(&form, n, p, &perp, &mut chosen, &mut local);
            local
        })
        .collect();
    out.par_sort_unstable();
    out
}

fn frame_dfs(form: &QuadraticForm, n: usize, p: u32, cands: &[u32], chosen: &mut Vec<u32>, out: &mut Vec<Frame>) {
    // cands: points orthogonal to everything chosen so far and larger than the
    // previous smaller point; p is the smaller point of the next pair
    for &q in cands.iter().filter(|&&q| q > p && form.b(p, q)) {
        chosen.push(p);
        chosen.push(q);
        if chosen.len() == 2 * n {
            out.push(Frame {
                points: chosen.clone(),
            });
        } else {
            let rest: Vec<u32> = cands
                .iter()
                .copied()
                .filter(|&x| x != q && !form.b(p, x) && !form.b(q, x))
                .collect();
            // the next smaller point must be below every point left after it
            for (i, &p2) in rest.iter().enumerate() {
                frame_dfs(form, n, p2, &rest[i + 1..], chosen, out);
            }
        }
        chosen.pop();
        chosen.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_frame_is_valid() {
        let f = standard_frame(4).unwrap();
        let form = QuadraticForm::hyperbolic(4);
        let sigma = is_frame(&form, &f.points).unwrap().unwrap();
        assert_eq!(sigma, vec![1, 0, 3, 2, 5, 4, 7, 6]);
    }

    #[test]
    fn broken_frames() {
        let form = QuadraticForm::hyperbolic(4);
        let mut pts = standard_frame(4).unwrap().points;
        // e1 + e3 is orthogonal to e1 and e3 but not to e2 or e4
        pts[7] = 0b101;
        assert_eq!(is_frame(&form, &pts).unwrap(), None);
        let gen_points = [1, 4, 5, 16, 17, 20, 21, 64];
        assert_eq!(is_frame(&form, &gen_points).unwrap(), None);
        assert!(is_frame(&form, &[1, 2]).is_err());
    }

    #[test]
    fn random_frames_are_valid() {
        let m = PolarSpaceModel::hyperbolic(4).unwrap();
        let a = random_frame(&m, 0);
        let b = random_frame(&m, 1);
        assert!(is_frame(m.form(), &a.points).unwrap().is_some());
        assert!(is_frame(m.form(), &b.points).unwrap().is_some());
        assert_ne!(a, b);
        assert_eq!(random_frame(&m, 0), a);
    }

    #[test]
    fn frame_counts() {
        // ordered pair sequences divided by the 2^n n! relabelings
        for (n, want) in [(2, 9), (3, 840)] {
            let m = PolarSpaceModel::hyperbolic(n).unwrap();
            let frames = enumerate_frames(&m);
            assert_eq!(frames.len(), want, "n={n}");
            for f in &frames {
                assert_eq!(f.canonical(), *f);
                assert!(is_frame(m.form(), &f.points).unwrap().is_some());
            }
        }
    }
}
