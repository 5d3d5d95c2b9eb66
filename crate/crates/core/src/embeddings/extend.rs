use rayon::prelude::*;
use serde::Serialize;

use super::classify::AbVerdict;
use crate::apartments::Frame;
use crate::graphcore::{iter_words, BitMatrix, DistanceMatrix};
use crate::grassmann::{generators_through, DualPolarGraph, PolarGeometry, Sign};
use crate::quadric::{gf2, QuadraticForm, SingularSubspace};
use crate::{Error, Result};

/// Dense dual polar tables for small ranks: adjacency rows, distances and
/// the points of every generator.
pub struct DualTables {
    pub adjacency: BitMatrix,
    pub dm: DistanceMatrix,
    /// Row `g`: indices (into the model's point list) of the points of generator `g`.
    pub points: BitMatrix,
}

impl DualTables {
    pub fn new(geo: &PolarGeometry, dual: &DualPolarGraph) -> Self {
        let pts = geo.model().points();
        let rows: Vec<Vec<u64>> = geo
            .generators()
            .par_iter()
            .map(|g| {
                let mut row = vec![0u64; pts.len().div_ceil(64)];
                for i in geo.point_indices(g) {
                    row[i / 64] |= 1 << (i % 64);
                }
                row
            })
            .collect();
        DualTables {
            adjacency: dual.graph.adjacency().clone(),
            dm: dual.dm.clone(),
            points: BitMatrix::from_rows(pts.len(), rows),
        }
    }

    /// Generators adjacent to all of `gens` in the dual polar graph.
    pub fn common_neighbors(&self, gens: &[usize]) -> Vec<usize> {
        let mut acc = self.adjacency.row(gens[0]).to_vec();
        for &g in &gens[1..] {
            acc.iter_mut()
                .zip(self.adjacency.row(g))
                .for_each(|(a, r)| *a &= r);
        }
        iter_words(&acc).collect()
    }

    /// Indices of the points common to all of `gens`.
    pub fn common_points(&self, gens: impl Iterator<Item = usize>, out: &mut [u64]) {
        out.fill(!0);
        for g in gens {
            out.iter_mut()
                .zip(self.points.row(g))
                .for_each(|(a, r)| *a &= r);
        }
    }
}

/// Generators adjacent to every given one, from subspaces: each lies on the
/// span of the pairwise intersections, so only generators through that span
/// are scanned.
fn common_neighbors_by_subspaces(geo: &PolarGeometry, gens: &[usize]) -> Result<Vec<usize>> {
    let n = geo.n();
    let subs: Vec<&SingularSubspace> = gens.iter().map(|&g| geo.generator(g)).collect();
    let mut vecs = Vec::new();
    for (i, a) in subs.iter().enumerate() {
        for b in &subs[i + 1..] {
            vecs.extend_from_slice(a.intersection(b).rows());
        }
    }
    let Ok(w) = geo.model().span(&vecs) else {
        return Ok(Vec::new());
    };
    Ok(generators_through(geo, &w, None)?
        .into_iter()
        .filter(|&g| subs.iter().all(|s| s.meet_vdim(geo.generator(g)) == n - 1))
        .collect())
}

/// The construction behind the extension, without the type precondition:
/// even words keep their images, each odd word goes to the unique common
/// dual-polar neighbour of the images of its `m` even neighbours.
/// Returns generator indices by word, or the first odd word without a unique answer.
pub fn hypercube_extension_raw(
    geo: &PolarGeometry,
    sign: Sign,
    map: &[u32],
    tables: Option<&DualTables>,
) -> Result<std::result::Result<Vec<usize>, (u32, usize)>> {
    let m = (2 * map.len()).trailing_zeros() as usize;
    if 2 * map.len() != 1 << m || m < 2 {
        return Err(Error::Precondition(format!("{} is not a half-cube order", map.len())));
    }
    let fam = geo.family(sign);
    let mut ext = vec![0usize; 1 << m];
    for w in 0..1u32 << m {
        if w.count_ones() % 2 == 0 {
            ext[w as usize] = fam[map[(w >> 1) as usize] as usize];
        }
    }
    let stride = tables.map_or(0, |t| t.adjacency.stride());
    let mut stack = [0u64; 16];
    let mut heap = Vec::new();
    let acc: &mut [u64] = if stride <= stack.len() {
        &mut stack[..stride]
    } else {
        heap.resize(stride, 0);
        &mut heap
    };
    for x in (0..1u32 << m).filter(|x| x.count_ones() % 2 == 1) {
        match tables {
            Some(t) => {
                acc.fill(!0);
                for i in 0..m {
                    let row = t.adjacency.row(ext[(x ^ (1 << i)) as usize]);
                    acc.iter_mut().zip(row).for_each(|(a, r)| *a &= r);
                }
                let count: u32 = acc.iter().map(|w| w.count_ones()).sum();
                if count != 1 {
                    return Ok(Err((x, count as usize)));
                }
                ext[x as usize] = iter_words(acc).next().unwrap();
            }
            None => {
                let nb: Vec<usize> = (0..m).map(|i| ext[(x ^ (1 << i)) as usize]).collect();
                let common = common_neighbors_by_subspaces(geo, &nb)?;
                if common.len() != 1 {
                    return Ok(Err((x, common.len())));
                }
                ext[x as usize] = common[0];
            }
        }
    }
    Ok(Ok(ext))
}

/// Extends a type-(A) weak embedding of `½H_m` (indexed by half-cube index)
/// to `H_m` (indexed by word) in the dual polar graph.
pub fn extend_to_hypercube(
    geo: &PolarGeometry,
    sign: Sign,
    map: &[u32],
    verdict: AbVerdict,
    tables: Option<&DualTables>,
) -> Result<Vec<usize>> {
    if verdict != AbVerdict::A {
        return Err(Error::Precondition("only type (A) embeddings extend".into()));
    }
    match hypercube_extension_raw(geo, sign, map, tables)? {
        Ok(ext) => Ok(ext),
        Err((x, k)) => Err(Error::Contradiction(format!(
            "odd word {x:#b} has {k} common neighbours, expected exactly one"
        ))),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RestrictionReport {
    /// Restriction to the words with bit `j` equal to `c` is isometric, at index `2j + c`.
    pub restrictions: Vec<bool>,
    /// Distances between even words are preserved.
    pub even_class_isometric: bool,
    /// Adjacency in both directions and injectivity on all of `H_m`.
    pub extension_weak: bool,
    pub extension_isometric: bool,
    /// Odd pairs at Hamming distance `m`, and how many of them keep that distance.
    pub odd_far_pairs: usize,
    pub odd_far_pairs_isometric: usize,
    /// `(X, Y, Hamming distance, image distance)`.
    pub first_violation: Option<(u32, u32, u32, u32)>,
}

impl RestrictionReport {
    pub fn passed(&self) -> bool {
        self.extension_weak && self.even_class_isometric && self.restrictions.iter().all(|&r| r)
    }
}

/// Distance checks on an extended map, from a distance oracle on its values.
pub fn restriction_isometry_checks(ext: &[usize], dist: impl Fn(usize, usize) -> u32) -> RestrictionReport {
    let m = ext.len().trailing_zeros();
    let mut rep = RestrictionReport {
        restrictions: vec![true; 2 * m as usize],
        even_class_isometric: true,
        extension_weak: true,
        extension_isometric: true,
        ..Default::default()
    };
    let full = ext.len() as u32;
    for x in 0..full {
        for y in x + 1..full {
            let h = (x ^ y).count_ones();
            let d = dist(ext[x as usize], ext[y as usize]);
            let iso = d == h;
            if d == 0 || (h == 1) != (d == 1) {
                rep.extension_weak = false;
            }
            if !iso {
                rep.extension_isometric = false;
                // the pair lies in the half selected by every coordinate it agrees on
                let agree = !(x ^ y) & (full - 1);
                for j in iter_words(&[agree as u64]) {
                    rep.restrictions[2 * j + (x >> j & 1) as usize] = false;
                }
            }
            let (px, py) = (x.count_ones() % 2, y.count_ones() % 2);
            if px == 0 && py == 0 && !iso {
                rep.even_class_isometric = false;
            }
            if px == 1 && py == 1 && h == m {
                rep.odd_far_pairs += 1;
                rep.odd_far_pairs_isometric += iso as usize;
            }
            if !iso && rep.first_violation.is_none() {
                rep.first_violation = Some((x, y, h, d));
            }
        }
    }
    rep
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FrameProvenance {
    pub index: usize,
    /// Generators intersected for this point.
    pub generators: Vec<usize>,
    pub point: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecoveredFrame {
    /// `q[2j + c]` is common to the images of all words with bit `j` equal to `c`.
    pub q: Vec<u32>,
    pub sigma: Vec<[usize; 2]>,
    pub provenance: Vec<FrameProvenance>,
    /// `q_i` is orthogonal to `q_k` for every `k` other than its partner.
    pub orthogonal_off_partner: bool,
    /// `q_i` is not orthogonal to its partner.
    pub partner_not_orthogonal: bool,
    /// Every image is spanned by the points its word selects.
    pub images_spanned: bool,
}

impl RecoveredFrame {
    pub fn passed(&self) -> bool {
        self.orthogonal_off_partner && self.partner_not_orthogonal && self.images_spanned
    }

    pub fn frame(&self) -> Frame {
        Frame { points: self.q.clone() }
    }
}

/// The orthogonality pattern of recovered points and whether each image is
/// spanned by the points its word selects. `contains(g, i)`: generator `g`
/// contains `q[i]`.
pub fn frame_flags(form: &QuadraticForm, q: &[u32], ext: &[usize], contains: impl Fn(usize, usize) -> bool) -> (bool, bool, bool) {
    let k = q.len();
    let mut off = true;
    let mut partner = true;
    for i in 0..k {
        for j in i + 1..k {
            let b = form.b(q[i], q[j]);
            if j == i ^ 1 {
                partner &= b;
            } else {
                off &= !b;
            }
        }
    }
    // independent points, m of them inside an m-dimensional generator, span it
    let spanned = gf2::rank(q) == k
        && (0..ext.len()).all(|x| (0..k / 2).all(|j| contains(ext[x], 2 * j + (x >> j & 1))));
    (off, partner, spanned)
}

/// Recovers the frame behind an extended map (generator indices by word).
pub fn recover_frame(geo: &PolarGeometry, ext: &[usize]) -> Result<RecoveredFrame> {
    let m = ext.len().trailing_zeros() as usize;
    let mut q = Vec::with_capacity(2 * m);
    let mut provenance = Vec::with_capacity(2 * m);
    for i in 0..2 * m {
        let (j, c) = (i / 2, i % 2);
        let gens: Vec<usize> = (0..ext.len())
            .filter(|x| x >> j & 1 == c)
            .map(|x| ext[x])
            .collect();
        let meet = gens[1..]
            .iter()
            .fold(*geo.generator(gens[0]), |acc, &g| acc.intersection(geo.generator(g)));
        if meet.vdim() != 1 {
            return Err(Error::Contradiction(format!(
                "images over index {i} meet in dimension {}",
                meet.vdim()
            )));
        }
        let p = meet.rows()[0];
        q.push(p);
        provenance.push(FrameProvenance {
            index: i,
            generators: gens,
            point: format!("{p:#x}"),
        });
    }
    let (off, partner, spanned) = frame_flags(geo.form(), &q, ext, |g, i| geo.generator(g).contains(q[i]));
    Ok(RecoveredFrame {
        sigma: Frame { points: q.clone() }.sigma_pairs(),
        q,
        provenance,
        orthogonal_off_partner: off,
        partner_not_orthogonal: partner,
        images_spanned: spanned,
    })
}

/// Table version of the point recovery, without provenance: returns the
/// recovered points and the three flags of [`frame_flags`].
pub fn recover_frame_points(geo: &PolarGeometry, t: &DualTables, ext: &[usize]) -> Result<(Vec<u32>, (bool, bool, bool))> {
    let m = ext.len().trailing_zeros() as usize;
    let pts = geo.model().points();
    let mut acc = vec![0u64; t.points.stride()];
    let mut idx = Vec::with_capacity(2 * m);
    for i in 0..2 * m {
        let (j, c) = (i / 2, i % 2);
        t.common_points((0..ext.len()).filter(|x| x >> j & 1 == c).map(|x| ext[x]), &mut acc);
        let count: u32 = acc.iter().map(|w| w.count_ones()).sum();
        if count != 1 {
            return Err(Error::Contradiction(format!(
                "images over index {i} share {count} points"
            )));
        }
        idx.push(iter_words(&acc).next().unwrap());
    }
    let q: Vec<u32> = idx.iter().map(|&i| pts[i]).collect();
    let flags = frame_flags(geo.form(), &q, ext, |g, i| t.points.get(g, idx[i]));
    Ok((q, flags))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apartments::{apartment_of, random_frame, standard_frame, Level};
    use crate::graphcore::halfcube_index;
    use crate::grassmann::build_dual_polar_graph;

    fn apartment_map(geo: &PolarGeometry, frame: &Frame) -> (Vec<u32>, Vec<usize>) {
        let ap = apartment_of(geo, frame, Level::HalfSpin(Sign::Plus)).unwrap();
        let mut map = vec![0u32; 8];
        for (&v, &w) in ap.members.iter().zip(&ap.words) {
            map[halfcube_index(w) as usize] = v as u32;
        }
        let dual = apartment_of(geo, frame, Level::Dual).unwrap();
        (map, dual.members)
    }

    #[test]
    fn apartment_round_trip() {
        let geo = PolarGeometry::new(4).unwrap();
        let dual = build_dual_polar_graph(&geo).unwrap();
        let t = DualTables::new(&geo, &dual);
        for seed in 0..5 {
            let frame = if seed == 0 {
                standard_frame(4).unwrap()
            } else {
                random_frame(geo.model(), seed)
            };
            let (map, dual_members) = apartment_map(&geo, &frame);
            let ext = extend_to_hypercube(&geo, Sign::Plus, &map, AbVerdict::A, Some(&t)).unwrap();
            let slow = extend_to_hypercube(&geo, Sign::Plus, &map, AbVerdict::A, None).unwrap();
            assert_eq!(ext, slow);
            let mut got = ext.clone();
            got.sort_unstable();
            assert_eq!(got, dual_members);
            for w in (0..16u32).filter(|w| w.count_ones() % 2 == 0) {
                assert_eq!(geo.local_index(ext[w as usize]) as u32, map[(w >> 1) as usize]);
            }
            let r = restriction_isometry_checks(&ext, |a, b| t.dm.get(a, b));
            assert!(r.passed() && r.extension_isometric);
            assert_eq!((r.odd_far_pairs, r.odd_far_pairs_isometric), (4, 4));
            let rf = recover_frame(&geo, &ext).unwrap();
            assert!(rf.passed());
            let (q, flags) = recover_frame_points(&geo, &t, &ext).unwrap();
            assert_eq!((q, flags), (rf.q.clone(), (true, true, true)));
            assert_eq!(rf.frame().canonical(), frame.canonical());
        }
        assert!(extend_to_hypercube(&geo, Sign::Plus, &[0; 8], AbVerdict::B, Some(&t)).is_err());
    }

    #[test]
    fn corrupted_extension_is_caught() {
        let geo = PolarGeometry::new(4).unwrap();
        let dual = build_dual_polar_graph(&geo).unwrap();
        let t = DualTables::new(&geo, &dual);
        let (map, _) = apartment_map(&geo, &standard_frame(4).unwrap());
        let mut ext = extend_to_hypercube(&geo, Sign::Plus, &map, AbVerdict::A, Some(&t)).unwrap();
        ext.swap(1, 2);
        let r = restriction_isometry_checks(&ext, |a, b| t.dm.get(a, b));
        assert!(!r.passed());
        assert!(r.first_violation.is_some());
    }
}
