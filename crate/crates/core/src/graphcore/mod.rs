//! Finite simple graphs, hop distances, cube generators and clique machinery.

pub mod bitset;
mod cliques;
mod export;
mod halfcube;

use rayon::prelude::*;

use crate::{Error, Result};
pub use bitset::{iter_words, iter_words_into, BitMatrix, BitSet};
pub use cliques::{enumerate_maximal_cliques, DEFAULT_CLIQUE_LIMIT};
pub use export::{to_dot, to_json, GraphJson};
pub use halfcube::{
    classify_halfcube_clique, geodesic_cover_check, halfcube_index, halfcube_word,
    separating_vertex, HalfcubeCliqueType,
};

/// Largest vertex count for which the dense adjacency matrix is kept.
pub const MAX_DENSE_VERTICES: usize = 1 << 15;

/// An undirected simple graph on vertices `0..vertex_count`.
///
/// Adjacency is stored twice: sorted neighbour lists and a dense bit matrix.
#[derive(Clone, Debug)]
pub struct FiniteGraph {
    label: Option<String>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    adjacency: BitMatrix,
    /// Bitstring view for cube graphs: `(m, word of each vertex)`.
    bitstrings: Option<(usize, Vec<u32>)>,
}

impl FiniteGraph {
    /// Builds a graph from an edge list. Self-loops are rejected, duplicate
    /// and reversed edges are merged.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], label: Option<String>) -> Result<Self> {
        if n > MAX_DENSE_VERTICES {
            return Err(Error::Budget {
                what: "graph vertices".into(),
                needed: n as u64,
                limit: MAX_DENSE_VERTICES as u64,
            });
        }
        let mut adjacency = BitMatrix::new(n, n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop at vertex {u}")));
            }
            adjacency.set(u, v);
            adjacency.set(v, u);
        }
        Ok(Self::from_matrix(adjacency, label))
    }

    /// Builds a graph from a symmetric adjacency predicate, evaluated on every
    /// unordered pair (in parallel over rows).
    pub fn from_predicate<F>(n: usize, label: Option<String>, adjacent: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> bool + Sync,
    {
        if n > MAX_DENSE_VERTICES {
            return Err(Error::Budget {
                what: "graph vertices".into(),
                needed: n as u64,
                limit: MAX_DENSE_VERTICES as u64,
            });
        }
        let stride = bitset::words_for(n);
        let upper: Vec<Vec<u64>> = (0..n)
            .into_par_iter()
            .map(|u| {
                let mut row = vec![0u64; stride];
                for v in u + 1..n {
                    if adjacent(u, v) {
                        row[v >> 6] |= 1 << (v & 63);
                    }
                }
                row
            })
            .collect();
        let mut adjacency = BitMatrix::from_rows(n, upper);
        for u in 0..n {
            let hits: Vec<usize> = bitset::iter_words(adjacency.row(u)).filter(|&v| v > u).collect();
            for v in hits {
                adjacency.set(v, u);
            }
        }
        Ok(Self::from_matrix(adjacency, label))
    }

    fn from_matrix(adjacency: BitMatrix, label: Option<String>) -> Self {
        let n = adjacency.rows();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for u in 0..n {
            targets.extend(bitset::iter_words(adjacency.row(u)).map(|v| v as u32));
            offsets.push(targets.len());
        }
        FiniteGraph {
            label,
            offsets,
            targets,
            adjacency,
            bitstrings: None,
        }
    }

    pub fn with_bitstrings(mut self, m: usize, words: Vec<u32>) -> Self {
        debug_assert_eq!(words.len(), self.vertex_count());
        self.bitstrings = Some((m, words));
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        self.adjacency.get(u, v)
    }

    pub fn adjacency(&self) -> &BitMatrix {
        &self.adjacency
    }

    /// Sorted edge list with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.vertex_count())
            .flat_map(|u| {
                self.neighbors(u)
                    .iter()
                    .map(move |&v| (u, v as usize))
                    .filter(|&(u, v)| u < v)
            })
            .collect()
    }

    /// `(m, words)` for hypercube and half-cube graphs.
    pub fn bitstrings(&self) -> Option<(usize, &[u32])> {
        self.bitstrings.as_ref().map(|(m, w)| (*m, w.as_slice()))
    }

    /// Bitstring of vertex `v`, if this graph carries a cube coordinate view.
    pub fn word(&self, v: usize) -> Option<u32> {
        self.bitstrings.as_ref().map(|(_, w)| w[v])
    }

    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        vertices.iter().enumerate().all(|(i, &u)| {
            vertices[i + 1..]
                .iter()
                .all(|&v| u != v && self.is_adjacent(u, v))
        })
    }

    /// Induced subgraph on `vertices`, relabelled in the given order.
    pub fn induced(&self, vertices: &[usize], label: Option<String>) -> Result<FiniteGraph> {
        let mut edges = Vec::new();
        for (i, &u) in vertices.iter().enumerate() {
            for (j, &v) in vertices.iter().enumerate().skip(i + 1) {
                if self.is_adjacent(u, v) {
                    edges.push((i, j));
                }
            }
        }
        FiniteGraph::from_edges(vertices.len(), &edges, label)
    }
}

/// The complete graph on `n` vertices.
pub fn complete_graph(n: usize) -> FiniteGraph {
    FiniteGraph::from_predicate(n, Some(format!("K_{n}")), |_, _| true).expect("complete graph size")
}

/// The `m`-dimensional hypercube `H_m`: all `m`-bit words, adjacent at Hamming
/// distance 1. Vertex `i` is the word `i`.
pub fn build_hypercube(m: usize) -> Result<FiniteGraph> {
    if m == 0 {
        return Err(Error::InvalidParameter("hypercube dimension must be at least 1".into()));
    }
    if m > 15 {
        return Err(Error::Budget {
            what: "hypercube dimension".into(),
            needed: m as u64,
            limit: 15,
        });
    }
    let n = 1usize << m;
    let mut edges = Vec::with_capacity(m * n / 2);
    for w in 0..n {
        for i in 0..m {
            let x = w ^ (1 << i);
            if w < x {
                edges.push((w, x));
            }
        }
    }
    let g = FiniteGraph::from_edges(n, &edges, Some(format!("H_{m}")))?;
    Ok(g.with_bitstrings(m, (0..n as u32).collect()))
}

/// The `m`-dimensional half-cube `½H_m` on the even-weight words, adjacent at
/// Hamming distance 2. Vertex `i` is the `i`-th even word in increasing order.
pub fn build_halfcube(m: usize) -> Result<FiniteGraph> {
    if m < 3 {
        return Err(Error::InvalidParameter("half-cube dimension must be at least 3".into()));
    }
    if m > 16 {
        return Err(Error::Budget {
            what: "half-cube dimension".into(),
            needed: m as u64,
            limit: 16,
        });
    }
    let n = 1usize << (m - 1);
    let words: Vec<u32> = (0..n).map(|i| halfcube_word(i as u32)).collect();
    let mut edges = Vec::new();
    for (a, &w) in words.iter().enumerate() {
        for i in 0..m {
            for j in i + 1..m {
                let x = w ^ (1 << i) ^ (1 << j);
                let b = halfcube_index(x) as usize;
                if a < b {
                    edges.push((a, b));
                }
            }
        }
    }
    let g = FiniteGraph::from_edges(n, &edges, Some(format!("halfH_{m}")))?;
    Ok(g.with_bitstrings(m, words))
}

/// All-pairs hop distances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    dist: Vec<u8>,
    diameter: u32,
}

impl DistanceMatrix {
    /// Wraps precomputed distances; used for graphs whose metric has a closed form.
    pub fn from_fn<F>(n: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> u32 + Sync,
    {
        let rows: Vec<Vec<u8>> = (0..n)
            .into_par_iter()
            .map(|u| (0..n).map(|v| f(u, v) as u8).collect())
            .collect();
        let dist: Vec<u8> = rows.concat();
        let diameter = dist.iter().copied().max().unwrap_or(0) as u32;
        DistanceMatrix { n, dist, diameter }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> u32 {
        self.dist[u * self.n + v] as u32
    }

    pub fn row(&self, u: usize) -> &[u8] {
        &self.dist[u * self.n..(u + 1) * self.n]
    }

    pub fn diameter(&self) -> u32 {
        self.diameter
    }

    /// Vertex pairs `(u, v)`, `u < v`, at maximal distance, in lexicographic order.
    pub fn opposite_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            (u + 1..self.n)
                .filter(move |&v| self.get(u, v) == self.diameter)
                .map(move |v| (u, v))
        })
    }
}

/// Breadth-first distances from `src`; unreachable vertices get `u32::MAX`.
pub fn bfs(g: &FiniteGraph, src: usize) -> Vec<u32> {
    let n = g.vertex_count();
    let mut dist = vec![u32::MAX; n];
    let mut queue = Vec::with_capacity(n);
    dist[src] = 0;
    queue.push(src as u32);
    let mut head = 0;
    while head < queue.len() {
        let u = queue[head] as usize;
        head += 1;
        let du = dist[u];
        for &v in g.neighbors(u) {
            if dist[v as usize] == u32::MAX {
                dist[v as usize] = du + 1;
                queue.push(v);
            }
        }
    }
    dist
}

/// Exact hop distances by one BFS per vertex.
pub fn all_pairs_distances(g: &FiniteGraph) -> Result<DistanceMatrix> {
    let n = g.vertex_count();
    let rows: Vec<Vec<u32>> = (0..n).into_par_iter().map(|s| bfs(g, s)).collect();
    let mut dist = Vec::with_capacity(n * n);
    let mut diameter = 0;
    for (u, row) in rows.iter().enumerate() {
        for (v, &d) in row.iter().enumerate() {
            if d == u32::MAX {
                return Err(Error::Disconnected(u, v));
            }
            if d > u8::MAX as u32 {
                return Err(Error::InvalidParameter("diameter exceeds 255".into()));
            }
            diameter = diameter.max(d);
            dist.push(d as u8);
        }
    }
    Ok(DistanceMatrix { n, dist, diameter })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypercube_basics() {
        let h1 = build_hypercube(1).unwrap();
        assert_eq!((h1.vertex_count(), h1.edge_count()), (2, 1));
        let h4 = build_hypercube(4).unwrap();
        assert_eq!((h4.vertex_count(), h4.edge_count()), (16, 32));
        let dm = all_pairs_distances(&h4).unwrap();
        assert_eq!(dm.diameter(), 4);
        assert_eq!(dm.get(0b0000, 0b1111), 4);
        assert!(build_hypercube(0).is_err());
    }

    #[test]
    fn halfcube_basics() {
        let g = build_halfcube(4).unwrap();
        assert_eq!(g.vertex_count(), 8);
        assert!((0..8).all(|v| g.degree(v) == 6));
        let dm = all_pairs_distances(&g).unwrap();
        assert_eq!(dm.diameter(), 2);
        // unique non-neighbour is the antipode
        for v in 0..8 {
            let far: Vec<usize> = (0..8).filter(|&u| dm.get(v, u) == 2).collect();
            assert_eq!(far.len(), 1);
            assert_eq!(g.word(far[0]).unwrap(), g.word(v).unwrap() ^ 0b1111);
        }
        let g5 = build_halfcube(5).unwrap();
        let dm5 = all_pairs_distances(&g5).unwrap();
        assert_eq!((g5.vertex_count(), dm5.diameter()), (16, 2));
        assert!((0..16).all(|v| dm5.row(v).iter().filter(|&&d| d == 2).count() == 5));
        let dm6 = all_pairs_distances(&build_halfcube(6).unwrap()).unwrap();
        assert_eq!((dm6.order(), dm6.diameter()), (32, 3));
        assert!(build_halfcube(2).is_err());
    }

    #[test]
    fn halfcube_diameters() {
        for (m, d) in [(7, 3), (8, 4)] {
            let dm = all_pairs_distances(&build_halfcube(m).unwrap()).unwrap();
            assert_eq!(dm.diameter(), d, "m={m}");
        }
    }

    #[test]
    fn disconnected_graph_reports_pair() {
        let g = FiniteGraph::from_edges(4, &[(0, 1), (2, 3)], None).unwrap();
        assert_eq!(all_pairs_distances(&g), Err(Error::Disconnected(0, 2)));
    }

    #[test]
    fn self_loops_rejected() {
        assert!(FiniteGraph::from_edges(3, &[(1, 1)], None).is_err());
    }

    #[test]
    fn predicate_and_edge_constructions_agree() {
        let h = build_hypercube(5).unwrap();
        let p = FiniteGraph::from_predicate(32, None, |u, v| (u ^ v).count_ones() == 1).unwrap();
        assert_eq!(h.edges(), p.edges());
    }
}
