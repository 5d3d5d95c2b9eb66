use super::bitset::iter_words;
use super::FiniteGraph;
use crate::{Error, Result};

pub const DEFAULT_CLIQUE_LIMIT: usize = 1_000_000;

/// All maximal cliques, each sorted ascending, the list sorted lexicographically.
///
/// Bron–Kerbosch with Tomita pivoting over bit sets. The pivot is the vertex of
/// `P ∪ X` with the most neighbours in `P`, ties broken by smallest index.
pub fn enumerate_maximal_cliques(g: &FiniteGraph, limit: usize) -> Result<Vec<Vec<usize>>> {
    let n = g.vertex_count();
    let stride = n.div_ceil(64);
    let mut p = vec![0u64; stride];
    for v in 0..n {
        p[v >> 6] |= 1 << (v & 63);
    }
    let x = vec![0u64; stride];
    let mut out = Vec::new();
    let mut r = Vec::new();
    expand(g, &mut r, p, x, &mut out, limit)?;
    out.sort();
    Ok(out)
}

fn expand(
    g: &FiniteGraph,
    r: &mut Vec<usize>,
    mut p: Vec<u64>,
    mut x: Vec<u64>,
    out: &mut Vec<Vec<usize>>,
    limit: usize,
) -> Result<()> {
    if p.iter().all(|&w| w == 0) {
        if x.iter().all(|&w| w == 0) {
            if out.len() >= limit {
                return Err(Error::CliqueLimit(limit));
            }
            let mut c = r.clone();
            c.sort_unstable();
            out.push(c);
        }
        return Ok(());
    }
    let adj = g.adjacency();
    let pivot = iter_words(&p)
        .chain(iter_words(&x))
        .max_by_key(|&u| {
            let row = adj.row(u);
            let cnt: u32 = p.iter().zip(row).map(|(a, b)| (a & b).count_ones()).sum();
            (cnt, std::cmp::Reverse(u))
        })
        .expect("P is non-empty");
    let prow = adj.row(pivot);
    let rest: Vec<u64> = p.iter().zip(prow).map(|(a, b)| a & !b).collect();
    let branch: Vec<usize> = iter_words(&rest).collect();
    for v in branch {
        let row = adj.row(v);
        let np: Vec<u64> = p.iter().zip(row).map(|(a, b)| a & b).collect();
        let nx: Vec<u64> = x.iter().zip(row).map(|(a, b)| a & b).collect();
        r.push(v);
        expand(g, r, np, nx, out, limit)?;
        r.pop();
        p[v >> 6] &= !(1 << (v & 63));
        x[v >> 6] |= 1 << (v & 63);
    }
    Ok(())
}
