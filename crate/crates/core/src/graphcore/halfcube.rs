//! Clique structure and metric lemmas of half-cube graphs.

use serde::{Deserialize, Serialize};

use super::{DistanceMatrix, FiniteGraph};
use crate::{Error, Result};

/// Even word with index `i` in the half-cube vertex order.
///
/// Bit 0 of an even word is the parity of the remaining bits, so `w >> 1`
/// is a bijection onto `0..2^(m-1)` that preserves order.
#[inline]
pub fn halfcube_word(i: u32) -> u32 {
    (i << 1) | (i.count_ones() & 1)
}

#[inline]
pub fn halfcube_index(w: u32) -> u32 {
    debug_assert!(w.count_ones() % 2 == 0);
    w >> 1
}

/// The two kinds of maximal cliques of `½H_m`, `m >= 4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HalfcubeCliqueType {
    /// All even words agreeing with `fixed_values` on the `m - 3` coordinates of `fixed_mask`.
    Star { fixed_mask: u32, fixed_values: u32 },
    /// All even words at Hamming distance 1 from the odd word `center`.
    SpecialSubset { center: u32 },
}

impl HalfcubeCliqueType {
    pub fn is_star(&self) -> bool {
        matches!(self, HalfcubeCliqueType::Star { .. })
    }

    /// Member words, increasing.
    pub fn members(&self, m: usize) -> Vec<u32> {
        let full = (1u32 << m) - 1;
        match *self {
            HalfcubeCliqueType::Star {
                fixed_mask,
                fixed_values,
            } => (0..=full)
                .filter(|w| w.count_ones() % 2 == 0 && w & fixed_mask == fixed_values)
                .collect(),
            HalfcubeCliqueType::SpecialSubset { center } => {
                let mut v: Vec<u32> = (0..m).map(|i| center ^ (1 << i)).collect();
                v.sort_unstable();
                v
            }
        }
    }
}

/// Classifies a maximal clique of `½H_m` given by its words.
///
/// Uses the witness tests (common fixed coordinates versus a common odd word at
/// distance 1), which also separates the two kinds when `m = 4` and both have
/// four elements.
pub fn classify_halfcube_clique(m: usize, words: &[u32]) -> Result<HalfcubeCliqueType> {
    if m < 4 {
        return Err(Error::Precondition("clique classification needs m >= 4".into()));
    }
    let full = (1u32 << m) - 1;
    for (i, &a) in words.iter().enumerate() {
        if a & !full != 0 || a.count_ones() % 2 != 0 {
            return Err(Error::Precondition(format!("{a:#b} is not an even {m}-bit word")));
        }
        if words[i + 1..].iter().any(|&b| (a ^ b).count_ones() != 2) {
            return Err(Error::Precondition("input is not a clique of the half-cube".into()));
        }
    }
    let Some(&first) = words.first() else {
        return Err(Error::Precondition("empty clique".into()));
    };

    let star = {
        let differ = words.iter().fold(0, |acc, &w| acc | (w ^ first));
        let mask = full & !differ;
        (words.len() == 4 && mask.count_ones() as usize == m - 3).then_some(
            HalfcubeCliqueType::Star {
                fixed_mask: mask,
                fixed_values: first & mask,
            },
        )
    };
    let special = {
        let center = (0..m).fold(0u32, |acc, j| {
            let ones = words.iter().filter(|&&w| w >> j & 1 == 1).count();
            if 2 * ones > words.len() {
                acc | 1 << j
            } else {
                acc
            }
        });
        (words.len() == m
            && center.count_ones() % 2 == 1
            && words.iter().all(|&w| (w ^ center).count_ones() == 1))
            .then_some(HalfcubeCliqueType::SpecialSubset { center })
    };
    match (star, special) {
        (Some(s), None) => Ok(s),
        (None, Some(s)) => Ok(s),
        (Some(_), Some(_)) => Err(Error::Contradiction(
            "clique is both a star and a special subset".into(),
        )),
        (None, None) => Err(Error::Precondition("clique is not maximal".into())),
    }
}

/// True iff every vertex lies on a geodesic between the opposite vertices `v` and `w`.
pub fn geodesic_cover_check(g: &FiniteGraph, dm: &DistanceMatrix, v: usize, w: usize) -> Result<bool> {
    if let Some((m, _)) = g.bitstrings() {
        if m % 2 != 0 {
            return Err(Error::Precondition(format!("m = {m} is odd")));
        }
    }
    let d = dm.get(v, w);
    if d != dm.diameter() {
        return Err(Error::Precondition(format!(
            "vertices {v} and {w} are at distance {d}, not opposite"
        )));
    }
    Ok((0..dm.order()).all(|x| dm.get(v, x) + dm.get(x, w) == d))
}

/// Smallest vertex adjacent to every vertex of `members` and not adjacent to
/// `excluded`, where `members ∪ {excluded}` must be a clique.
pub fn separating_vertex(g: &FiniteGraph, members: &[usize], excluded: usize) -> Result<Option<usize>> {
    let mut all = members.to_vec();
    all.push(excluded);
    if !g.is_clique(&all) {
        return Err(Error::Precondition("members and excluded vertex must form a clique".into()));
    }
    Ok((0..g.vertex_count()).find(|&x| {
        !all.contains(&x)
            && members.iter().all(|&u| g.is_adjacent(u, x))
            && !g.is_adjacent(excluded, x)
    }))
}
