use std::sync::OnceLock;

use rayon::prelude::*;

use crate::graphcore::{iter_words_into, DistanceMatrix};
use crate::grassmann::{PolarGeometry, Sign};

/// Distance classes compared during a search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// Adjacency in both directions: distances are compared after clamping to 2.
    Weak,
    /// Exact distances.
    Isometric,
}

impl Kind {
    #[inline]
    pub fn class(self, d: u32) -> u32 {
        match self {
            Kind::Weak => d.min(2),
            Kind::Isometric => d,
        }
    }
}

impl std::str::FromStr for Kind {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Kind> {
        match s {
            "weak" => Ok(Kind::Weak),
            "isometric" => Ok(Kind::Isometric),
            _ => Err(crate::Error::InvalidParameter(format!("unknown embedding kind {s:?}"))),
        }
    }
}

/// A graph to embed into, seen through its metric.
pub trait Host: Sync {
    fn order(&self) -> usize;

    fn distance(&self, u: usize, v: usize) -> u32;

    /// Writes to `out`, increasing, every vertex `x` with
    /// `kind.class(distance(a, x)) == c` for every anchor `(a, c)`.
    /// At least one anchor must be given.
    fn candidates(&self, anchors: &[(u32, u32)], kind: Kind, out: &mut Vec<u32>);
}

/// Host backed by per-distance bit rows; suited to a few thousand vertices.
pub struct TableHost {
    n: usize,
    stride: usize,
    diameter: u32,
    dm: DistanceMatrix,
    /// `layers[d]` holds row `v` at `v * stride`: vertices at distance `d` from `v`.
    layers: Vec<Vec<u64>>,
    /// Vertices at distance at least 2.
    far: Vec<u64>,
}

impl TableHost {
    pub fn new(dm: DistanceMatrix) -> Self {
        let n = dm.order();
        let stride = n.div_ceil(64);
        let diameter = dm.diameter();
        let rows: Vec<(Vec<Vec<u64>>, Vec<u64>)> = (0..n)
            .into_par_iter()
            .map(|v| {
                let mut layer = vec![vec![0u64; stride]; diameter as usize + 1];
                let mut far = vec![0u64; stride];
                for (x, &d) in dm.row(v).iter().enumerate() {
                    layer[d as usize][x >> 6] |= 1 << (x & 63);
                    if d >= 2 {
                        far[x >> 6] |= 1 << (x & 63);
                    }
                }
                (layer, far)
            })
            .collect();
        let mut layers = vec![Vec::with_capacity(n * stride); diameter as usize + 1];
        let mut far = Vec::with_capacity(n * stride);
        for (l, f) in rows {
            for (d, row) in l.into_iter().enumerate() {
                layers[d].extend_from_slice(&row);
            }
            far.extend_from_slice(&f);
        }
        TableHost {
            n,
            stride,
            diameter,
            dm,
            layers,
            far,
        }
    }

    pub fn dm(&self) -> &DistanceMatrix {
        &self.dm
    }

    #[inline]
    fn row(&self, a: u32, class: u32, kind: Kind) -> Option<&[u64]> {
        let a = a as usize;
        let r = a * self.stride..(a + 1) * self.stride;
        if kind == Kind::Weak && class >= 2 {
            Some(&self.far[r])
        } else if class <= self.diameter {
            Some(&self.layers[class as usize][r])
        } else {
            None
        }
    }
}

impl Host for TableHost {
    fn order(&self) -> usize {
        self.n
    }

    #[inline]
    fn distance(&self, u: usize, v: usize) -> u32 {
        self.dm.get(u, v)
    }

    #[inline]
    fn candidates(&self, anchors: &[(u32, u32)], kind: Kind, out: &mut Vec<u32>) {
        out.clear();
        let mut acc = [0u64; 64];
        let s = self.stride;
        if s > acc.len() {
            // wide hosts take the allocating path
            let mut acc = vec![!0u64; s];
            for &(a, c) in anchors {
                match self.row(a, c, kind) {
                    Some(row) => acc.iter_mut().zip(row).for_each(|(x, y)| *x &= y),
                    None => return,
                }
            }
            iter_words_into(&acc, out);
            return;
        }
        let acc = &mut acc[..s];
        let Some((&(a0, c0), rest)) = anchors.split_first() else {
            return;
        };
        match self.row(a0, c0, kind) {
            Some(row) => acc.copy_from_slice(row),
            None => return,
        }
        for &(a, c) in rest {
            match self.row(a, c, kind) {
                Some(row) => {
                    let mut any = 0;
                    for (x, y) in acc.iter_mut().zip(row) {
                        *x &= y;
                        any |= *x;
                    }
                    if any == 0 {
                        return;
                    }
                }
                None => return,
            }
        }
        iter_words_into(acc, out);
    }
}

/// Half-spin host computed from subspaces, for families too large for tables.
/// Neighbour lists are computed on first use and cached.
pub struct FormulaHost<'a> {
    geo: &'a PolarGeometry,
    sign: Sign,
    neighbors: Vec<OnceLock<Box<[u32]>>>,
}

impl<'a> FormulaHost<'a> {
    pub fn new(geo: &'a PolarGeometry, sign: Sign) -> Self {
        let n = geo.family(sign).len();
        FormulaHost {
            geo,
            sign,
            neighbors: (0..n).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        self.neighbors[v].get_or_init(|| {
            let nn = self.geo.n();
            let x = self.geo.member(self.sign, v);
            (0..self.order() as u32)
                .filter(|&y| x.meet_vdim(self.geo.member(self.sign, y as usize)) == nn - 2)
                .collect()
        })
    }
}

impl Host for FormulaHost<'_> {
    fn order(&self) -> usize {
        self.geo.family(self.sign).len()
    }

    #[inline]
    fn distance(&self, u: usize, v: usize) -> u32 {
        self.geo.halfspin_distance(self.sign, u, v)
    }

    fn candidates(&self, anchors: &[(u32, u32)], kind: Kind, out: &mut Vec<u32>) {
        out.clear();
        let ok = |x: u32| {
            anchors
                .iter()
                .all(|&(a, c)| kind.class(self.distance(a as usize, x as usize)) == c)
        };
        match anchors.iter().find(|a| a.1 == 1) {
            Some(&(a, _)) => out.extend(self.neighbors(a as usize).iter().copied().filter(|&x| ok(x))),
            None => out.extend((0..self.order() as u32).filter(|&x| ok(x))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphcore::{all_pairs_distances, build_halfcube};
    use crate::grassmann::build_halfspin_graph;

    #[test]
    fn table_candidates_match_scan() {
        let g = build_halfcube(6).unwrap();
        let dm = all_pairs_distances(&g).unwrap();
        let h = TableHost::new(dm.clone());
        let mut out = Vec::new();
        for kind in [Kind::Weak, Kind::Isometric] {
            let anchors = [(0u32, 1u32), (5, kind.class(3))];
            h.candidates(&anchors, kind, &mut out);
            let want: Vec<u32> = (0..32u32)
                .filter(|&x| {
                    anchors
                        .iter()
                        .all(|&(a, c)| kind.class(dm.get(a as usize, x as usize)) == c)
                })
                .collect();
            assert_eq!(out, want);
        }
    }

    #[test]
    fn formula_host_agrees_with_table() {
        let geo = PolarGeometry::new(4).unwrap();
        let hs = build_halfspin_graph(&geo, Sign::Plus).unwrap();
        let t = TableHost::new(hs.dm.clone());
        let f = FormulaHost::new(&geo, Sign::Plus);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for anchors in [vec![(3u32, 1u32)], vec![(3, 1), (40, 2)], vec![(0, 2), (77, 1), (100, 1)]] {
            t.candidates(&anchors, Kind::Isometric, &mut a);
            f.candidates(&anchors, Kind::Isometric, &mut b);
            assert_eq!(a, b);
        }
        assert_eq!(f.neighbors(0).len(), 70);
    }
}
