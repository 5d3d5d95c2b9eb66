use std::collections::{BTreeMap, HashMap};
use std::hash::{BuildHasherDefault, Hasher};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::classify::{classify_ab, halfcube_cliques, type_swap_automorphism_h4, AbVerdict, HostCliqueIndex, PatternClique};
use super::extend::{
    extend_to_hypercube, hypercube_extension_raw, recover_frame, recover_frame_points, restriction_isometry_checks,
    DualTables,
};
use super::host::{FormulaHost, Host, Kind, TableHost};
use super::search::{sample_embeddings, search_fold, Pattern, SearchConfig, SearchStats};
use crate::apartments::{apartment_of, enumerate_frames, random_frame, recognize_apartment, recognize_dual_apartment, standard_frame, Level};
use crate::graphcore::{build_halfcube, build_hypercube, halfcube_index, DistanceMatrix};
use crate::grassmann::{build_dual_polar_graph, build_halfspin_graph, clique_census, PolarGeometry, Sign};
use crate::quadric::SingularSubspace;
use crate::report::Fnv64;
use crate::{Error, Result};

/// Largest family searched through distance tables.
const TABLE_HOST_LIMIT: usize = 4096;
/// Failure messages kept per report.
const KEEP_FAILURES: usize = 8;

enum AnyHost<'a> {
    Table(TableHost),
    Formula(FormulaHost<'a>),
}

impl Host for AnyHost<'_> {
    fn order(&self) -> usize {
        match self {
            AnyHost::Table(h) => h.order(),
            AnyHost::Formula(h) => h.order(),
        }
    }

    #[inline]
    fn distance(&self, u: usize, v: usize) -> u32 {
        match self {
            AnyHost::Table(h) => h.distance(u, v),
            AnyHost::Formula(h) => h.distance(u, v),
        }
    }

    #[inline]
    fn candidates(&self, anchors: &[(u32, u32)], kind: Kind, out: &mut Vec<u32>) {
        match self {
            AnyHost::Table(h) => h.candidates(anchors, kind, out),
            AnyHost::Formula(h) => h.candidates(anchors, kind, out),
        }
    }
}

fn halfspin_host(geo: &PolarGeometry, sign: Sign) -> Result<(AnyHost<'_>, Option<DistanceMatrix>)> {
    if geo.family(sign).len() <= TABLE_HOST_LIMIT {
        let hs = build_halfspin_graph(geo, sign)?;
        Ok((AnyHost::Table(TableHost::new(hs.dm.clone())), Some(hs.dm)))
    } else {
        Ok((AnyHost::Formula(FormulaHost::new(geo, sign)), None))
    }
}

/// Sorted image of a map; packed when it has eight vertices below `2^16`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum ImageKey {
    Packed(u128),
    Long(Box<[u32]>),
}

impl ImageKey {
    fn new(f: &[u32]) -> Self {
        if f.len() == 8 && f.iter().all(|&x| x < 1 << 16) {
            let mut a = [0u32; 8];
            a.copy_from_slice(f);
            a.sort_unstable();
            let mut k = 0u128;
            for x in a {
                k = k << 16 | x as u128;
            }
            ImageKey::Packed(k)
        } else {
            let mut v = f.to_vec();
            v.sort_unstable();
            ImageKey::Long(v.into_boxed_slice())
        }
    }

    fn members(&self) -> Vec<usize> {
        match self {
            ImageKey::Packed(k) => (0..8).rev().map(|i| (k >> (16 * i) & 0xffff) as usize).collect(),
            ImageKey::Long(v) => v.iter().map(|&x| x as usize).collect(),
        }
    }
}

fn subspace_digest(s: &SingularSubspace) -> u64 {
    let mut h = Fnv64::default();
    h.write_usize(s.vdim());
    for &r in s.rows() {
        h.write_u32(r);
    }
    h.finish()
}

#[derive(Clone, Copy, Debug)]
struct ImageInfo {
    maps: u32,
    witness: u64,
}

/// Per-branch counters of the main theorem pass.
#[derive(Default)]
struct Tally {
    maps: u64,
    containment_failures: u64,
    witness_inconsistent: u64,
    images: HashMap<ImageKey, ImageInfo, BuildHasherDefault<Fnv64>>,
    a_maps: u64,
    b_maps: u64,
    classification_failures: u64,
    swap_checked: u64,
    swap_to_a: u64,
    extended: u64,
    extension_failures: u64,
    extension_weak: u64,
    restrictions_isometric: u64,
    even_class_isometric: u64,
    extension_isometric: u64,
    odd_far_pairs: u64,
    odd_far_pairs_isometric: u64,
    frames_recovered: u64,
    frames_valid: u64,
    b_extendible: u64,
    failures: Vec<String>,
}

impl Tally {
    fn fail(&mut self, msg: String) {
        if self.failures.len() < KEEP_FAILURES {
            self.failures.push(msg);
        }
    }

    fn merge(mut self, o: Tally) -> Tally {
        self.maps += o.maps;
        self.containment_failures += o.containment_failures;
        self.witness_inconsistent += o.witness_inconsistent;
        self.a_maps += o.a_maps;
        self.b_maps += o.b_maps;
        self.classification_failures += o.classification_failures;
        self.swap_checked += o.swap_checked;
        self.swap_to_a += o.swap_to_a;
        self.extended += o.extended;
        self.extension_failures += o.extension_failures;
        self.extension_weak += o.extension_weak;
        self.restrictions_isometric += o.restrictions_isometric;
        self.even_class_isometric += o.even_class_isometric;
        self.extension_isometric += o.extension_isometric;
        self.odd_far_pairs += o.odd_far_pairs;
        self.odd_far_pairs_isometric += o.odd_far_pairs_isometric;
        self.frames_recovered += o.frames_recovered;
        self.frames_valid += o.frames_valid;
        self.b_extendible += o.b_extendible;
        for f in o.failures {
            self.fail(f);
        }
        let mut other = o.images;
        if self.images.len() < other.len() {
            std::mem::swap(&mut self.images, &mut other);
        }
        for (k, v) in other {
            self.add_image(k, v);
        }
        self
    }

    fn add_image(&mut self, k: ImageKey, v: ImageInfo) {
        match self.images.get_mut(&k) {
            Some(e) => {
                e.maps += v.maps;
                if e.witness != v.witness {
                    self.witness_inconsistent += 1;
                }
            }
            None => {
                self.images.insert(k, v);
            }
        }
    }
}

/// Everything the per-map checks need, built once.
struct Ctx<'a> {
    geo: &'a PolarGeometry,
    sign: Sign,
    n: usize,
    m: usize,
    cliques: Vec<PatternClique>,
    index: Option<HostCliqueIndex>,
    tables: Option<DualTables>,
    opposite: [(usize, usize); 2],
    swap: Option<Vec<u32>>,
    classify: bool,
    extend: bool,
}

impl Ctx<'_> {
    /// Intersection of the images of a diametral pair; must have the
    /// predicted dimension, lie in every image, and not depend on the pair.
    fn containment(&self, f: &[u32]) -> std::result::Result<u64, String> {
        let meet = |(v, w): (usize, usize)| {
            self.geo
                .member(self.sign, f[v] as usize)
                .intersection(self.geo.member(self.sign, f[w] as usize))
        };
        let mm = meet(self.opposite[0]);
        let want = self.n as i32 - self.m as i32 - 1;
        if mm.pdim() != want {
            return Err(format!("diametral meet has pdim {}, expected {want} (map {f:?})", mm.pdim()));
        }
        if mm.vdim() > 0 && !f.iter().all(|&x| self.geo.member(self.sign, x as usize).contains_subspace(&mm)) {
            return Err(format!("an image misses the diametral meet (map {f:?})"));
        }
        if meet(self.opposite[1]) != mm {
            return Err(format!("diametral meets differ between pairs (map {f:?})"));
        }
        Ok(subspace_digest(&mm))
    }

    fn verdict(&self, f: &[u32]) -> std::result::Result<AbVerdict, String> {
        match &self.index {
            Some(ix) => {
                let (mut same, mut swapped) = (0, 0);
                let mut buf = [0u32; 8];
                for c in &self.cliques {
                    let k = c.members.len();
                    for (b, &v) in buf.iter_mut().zip(&c.members) {
                        *b = f[v as usize];
                    }
                    let Some(h) = ix.lookup(&buf[..k]) else {
                        return Err(format!("no unique host clique over {:?} (map {f:?})", &buf[..k]));
                    };
                    if ix.is_star(h) == c.kind.is_star() {
                        same += 1;
                    } else {
                        swapped += 1;
                    }
                }
                match (same, swapped) {
                    (_, 0) => Ok(AbVerdict::A),
                    (0, _) => Ok(AbVerdict::B),
                    _ => Err(format!("mixed clique table {same}/{swapped} (map {f:?})")),
                }
            }
            None => classify_ab(self.geo, self.sign, &self.cliques, f)
                .map(|c| c.verdict)
                .map_err(|e| format!("{e} (map {f:?})")),
        }
    }

    fn dual_distance(&self, a: usize, b: usize) -> u32 {
        match &self.tables {
            Some(t) => t.dm.get(a, b),
            None => self.geo.dual_distance(self.geo.generator(a), self.geo.generator(b)),
        }
    }

    fn extension_checks(&self, f: &[u32], t: &mut Tally) {
        let ext = match hypercube_extension_raw(self.geo, self.sign, f, self.tables.as_ref()) {
            Ok(Ok(ext)) => ext,
            Ok(Err((x, k))) => {
                t.extension_failures += 1;
                t.fail(format!("odd word {x:#b} has {k} common neighbours (map {f:?})"));
                return;
            }
            Err(e) => {
                t.extension_failures += 1;
                t.fail(e.to_string());
                return;
            }
        };
        t.extended += 1;
        let r = restriction_isometry_checks(&ext, |a, b| self.dual_distance(a, b));
        t.extension_weak += r.extension_weak as u64;
        t.restrictions_isometric += r.restrictions.iter().all(|&x| x) as u64;
        t.even_class_isometric += r.even_class_isometric as u64;
        t.extension_isometric += r.extension_isometric as u64;
        t.odd_far_pairs += r.odd_far_pairs as u64;
        t.odd_far_pairs_isometric += r.odd_far_pairs_isometric as u64;
        if !r.passed() {
            t.fail(format!("restriction checks failed at {:?} (map {f:?})", r.first_violation));
            return;
        }
        let flags = match &self.tables {
            Some(tb) => recover_frame_points(self.geo, tb, &ext).map(|x| x.1),
            None => recover_frame(self.geo, &ext)
                .map(|r| (r.orthogonal_off_partner, r.partner_not_orthogonal, r.images_spanned)),
        };
        match flags {
            Ok(fl) => {
                t.frames_recovered += 1;
                if fl == (true, true, true) {
                    t.frames_valid += 1;
                } else {
                    t.fail(format!("recovered frame flags {fl:?} (map {f:?})"));
                }
            }
            Err(e) => t.fail(format!("{e} (map {f:?})")),
        }
    }

    /// Whether the extension construction also goes through for a (B) map.
    fn b_extendible(&self, f: &[u32]) -> bool {
        match hypercube_extension_raw(self.geo, self.sign, f, self.tables.as_ref()) {
            Ok(Ok(ext)) => restriction_isometry_checks(&ext, |a, b| self.dual_distance(a, b)).extension_weak,
            _ => false,
        }
    }

    fn check(&self, f: &[u32], t: &mut Tally) {
        t.maps += 1;
        let witness = match self.containment(f) {
            Ok(d) => d,
            Err(msg) => {
                t.containment_failures += 1;
                t.fail(msg);
                0
            }
        };
        t.add_image(ImageKey::new(f), ImageInfo { maps: 1, witness });
        if !self.classify {
            return;
        }
        match self.verdict(f) {
            Ok(AbVerdict::A) => {
                t.a_maps += 1;
                if self.extend {
                    self.extension_checks(f, t);
                }
            }
            Ok(AbVerdict::B) => {
                t.b_maps += 1;
                if let Some(h) = &self.swap {
                    let g: Vec<u32> = h.iter().map(|&x| f[x as usize]).collect();
                    t.swap_checked += 1;
                    if self.verdict(&g) == Ok(AbVerdict::A) && ImageKey::new(&g) == ImageKey::new(f) {
                        t.swap_to_a += 1;
                    } else {
                        t.fail(format!("swapped map is not of type (A) (map {f:?})"));
                    }
                }
                if self.extend && self.b_extendible(f) {
                    t.b_extendible += 1;
                    t.fail(format!("type (B) map extends (map {f:?})"));
                }
            }
            Err(msg) => {
                t.classification_failures += 1;
                t.fail(msg);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ApartmentComparison {
    pub frames: u64,
    pub apartments: u64,
    pub images_not_apartments: u64,
    pub apartments_not_images: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassificationTally {
    pub a_maps: u64,
    pub b_maps: u64,
    pub failures: u64,
    /// (B) maps composed with the type swap, and how many became (A) with the same image.
    pub swap_checked: u64,
    pub swap_to_a: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtensionTally {
    pub extended: u64,
    pub failures: u64,
    pub weak_embeddings: u64,
    pub restrictions_isometric: u64,
    pub even_class_isometric: u64,
    pub frames_recovered: u64,
    pub frames_valid: u64,
    /// (B) maps for which the construction still yields a weak embedding.
    pub b_maps_extendible: u64,
    /// Measured only: extensions that are isometric.
    pub extensions_isometric: u64,
    /// Measured only: odd pairs at Hamming distance m, and those keeping it.
    pub odd_far_pairs: u64,
    pub odd_far_pairs_isometric: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MainTheoremReport {
    pub n: usize,
    pub m: usize,
    pub sign: Sign,
    pub mode: &'static str,
    pub symmetry_breaking: bool,
    pub seed: u64,
    pub search: SearchStats,
    pub maps: u64,
    pub witness_pdim: i32,
    pub containment_failures: u64,
    pub witness_inconsistent: u64,
    pub distinct_images: u64,
    /// `maps per image -> number of images`.
    pub maps_per_image: BTreeMap<u32, u64>,
    pub images_recognized: u64,
    pub images_rejected: u64,
    pub recognizer_witness_mismatches: u64,
    pub classification: Option<ClassificationTally>,
    pub extension: Option<ExtensionTally>,
    pub apartments: Option<ApartmentComparison>,
    /// FNV-1a over the sorted image member lists.
    pub image_set_digest: String,
    pub failures: Vec<String>,
    pub passed: bool,
    pub conclusive: bool,
}

/// Options of the main theorem pass beyond the search configuration.
#[derive(Clone, Copy, Debug)]
pub struct MainOptions {
    pub classify: bool,
    /// Compare the image set with all frame-generated apartments (needs an exhaustive run).
    pub compare_apartments: bool,
}

impl Default for MainOptions {
    fn default() -> Self {
        MainOptions {
            classify: true,
            compare_apartments: true,
        }
    }
}

/// Isometric embeddings of `½H_m` into one half-spin family: every image must
/// lie in the parabolic subspace over the diametral meet and be an apartment
/// there. With `m = n` the (A) maps are also extended and their frames recovered.
pub fn verify_main_theorem(geo: &PolarGeometry, sign: Sign, m: usize, config: &SearchConfig) -> Result<MainTheoremReport> {
    verify_main_theorem_with(geo, sign, m, config, MainOptions::default())
}

pub fn verify_main_theorem_with(
    geo: &PolarGeometry,
    sign: Sign,
    m: usize,
    config: &SearchConfig,
    opts: MainOptions,
) -> Result<MainTheoremReport> {
    let n = geo.n();
    if m % 2 != 0 || m < 4 || m > n {
        return Err(Error::Precondition(format!("need even m with 4 <= m <= n, got m = {m}, n = {n}")));
    }
    let pattern_graph = build_halfcube(m)?;
    let mut pattern = Pattern::new(&pattern_graph)?;
    if config.symmetry_breaking && config.sample.is_none() {
        pattern = pattern.with_symmetry_breaking();
    }
    let pdm = pattern.dm();
    let opp: Vec<(usize, usize)> = pdm.opposite_pairs().collect();
    let (host, hdm) = halfspin_host(geo, sign)?;
    let index = if n == 4 && opts.classify {
        let hs = build_halfspin_graph(geo, sign)?;
        let census = clique_census(geo, &hs)?;
        if !census.all_classified || !census.matches_generated {
            return Err(Error::Contradiction("host clique census failed".into()));
        }
        Some(HostCliqueIndex::new(sign, hs.graph.vertex_count(), census.cliques)?)
    } else {
        None
    };
    let extend = opts.classify && m == n;
    let tables = if extend && geo.generators().len() <= TABLE_HOST_LIMIT * 2 {
        Some(DualTables::new(geo, &build_dual_polar_graph(geo)?))
    } else {
        None
    };
    drop(hdm);
    let ctx = Ctx {
        geo,
        sign,
        n,
        m,
        cliques: if opts.classify { halfcube_cliques(m)? } else { Vec::new() },
        index,
        tables,
        opposite: [opp[0], opp[opp.len() - 1]],
        swap: (m == 4).then(type_swap_automorphism_h4),
        classify: opts.classify,
        extend,
    };

    let (tally, stats, mode) = match config.sample {
        Some(s) => {
            let (maps, stats) = sample_embeddings(&pattern, &host, Kind::Isometric, s, config.seed);
            let mut t = Tally::default();
            for f in &maps {
                ctx.check(f, &mut t);
            }
            (t, stats, "sampled")
        }
        None => {
            let cfg = SearchConfig {
                kind: Kind::Isometric,
                ..config.clone()
            };
            let (t, stats) = search_fold(
                &pattern,
                &host,
                &cfg,
                Tally::default,
                |t, f| {
                    ctx.check(f, t);
                    true
                },
                Tally::merge,
            );
            (t, stats, "exhaustive")
        }
    };
    finish_main(geo, sign, m, config, opts, &ctx, tally, stats, mode)
}

#[allow(clippy::too_many_arguments)]
fn finish_main(
    geo: &PolarGeometry,
    sign: Sign,
    m: usize,
    config: &SearchConfig,
    opts: MainOptions,
    ctx: &Ctx,
    tally: Tally,
    stats: SearchStats,
    mode: &'static str,
) -> Result<MainTheoremReport> {
    let n = geo.n();
    let mut images: Vec<(ImageKey, ImageInfo)> = tally.images.into_iter().collect();
    images.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let mut digest = Fnv64::default();
    let mut per_image: BTreeMap<u32, u64> = BTreeMap::new();
    for (k, info) in &images {
        for v in k.members() {
            digest.write_u32(v as u32);
        }
        digest.write_u8(0xff);
        *per_image.entry(info.maps).or_default() += 1;
    }
    let checks: Vec<(bool, bool, Option<String>)> = images
        .par_iter()
        .map(|(k, info)| {
            let members = k.members();
            match recognize_apartment(geo, sign, &members) {
                Ok(v) => match v.recognized() {
                    Some(r) => {
                        let same = subspace_digest(&r.m) == info.witness;
                        (true, same, (!same).then(|| format!("recognizer witness differs for image {members:?}")))
                    }
                    None => (false, true, Some(format!("image {members:?} is not an apartment"))),
                },
                Err(e) => (false, true, Some(format!("recognition of {members:?} failed: {e}"))),
            }
        })
        .collect();
    let mut failures = tally.failures;
    let recognized = checks.iter().filter(|c| c.0).count() as u64;
    let mismatches = checks.iter().filter(|c| !c.1).count() as u64;
    for msg in checks.into_iter().filter_map(|c| c.2) {
        if failures.len() < KEEP_FAILURES {
            failures.push(msg);
        }
    }

    let apartments = if opts.compare_apartments && mode == "exhaustive" && stats.complete && n == m && n <= 4 {
        let frames = enumerate_frames(geo.model());
        let mut aps: Vec<ImageKey> = frames
            .par_iter()
            .map(|fr| {
                apartment_of(geo, fr, Level::HalfSpin(sign)).map(|a| {
                    let v: Vec<u32> = a.members.iter().map(|&x| x as u32).collect();
                    ImageKey::new(&v)
                })
            })
            .collect::<Result<_>>()?;
        aps.par_sort_unstable();
        aps.dedup();
        let keys: Vec<&ImageKey> = images.iter().map(|x| &x.0).collect();
        let not_ap = keys.iter().filter(|k| aps.binary_search(k).is_err()).count() as u64;
        let not_img = aps
            .iter()
            .filter(|a| keys.binary_search(a).is_err())
            .count() as u64;
        Some(ApartmentComparison {
            frames: frames.len() as u64,
            apartments: aps.len() as u64,
            images_not_apartments: not_ap,
            apartments_not_images: not_img,
        })
    } else {
        None
    };

    let classification = ctx.classify.then(|| ClassificationTally {
        a_maps: tally.a_maps,
        b_maps: tally.b_maps,
        failures: tally.classification_failures,
        swap_checked: tally.swap_checked,
        swap_to_a: tally.swap_to_a,
    });
    let extension = ctx.extend.then(|| ExtensionTally {
        extended: tally.extended,
        failures: tally.extension_failures,
        weak_embeddings: tally.extension_weak,
        restrictions_isometric: tally.restrictions_isometric,
        even_class_isometric: tally.even_class_isometric,
        frames_recovered: tally.frames_recovered,
        frames_valid: tally.frames_valid,
        b_maps_extendible: tally.b_extendible,
        extensions_isometric: tally.extension_isometric,
        odd_far_pairs: tally.odd_far_pairs,
        odd_far_pairs_isometric: tally.odd_far_pairs_isometric,
    });

    let distinct = images.len() as u64;
    let mut passed = tally.containment_failures == 0
        && tally.witness_inconsistent == 0
        && recognized == distinct
        && mismatches == 0
        && tally.maps > 0;
    if let Some(c) = &classification {
        passed &= c.failures == 0 && c.a_maps + c.b_maps == tally.maps && c.swap_to_a == c.swap_checked;
    }
    if let Some(e) = &extension {
        passed &= e.failures == 0
            && e.extended == tally.a_maps
            && e.weak_embeddings == e.extended
            && e.restrictions_isometric == e.extended
            && e.even_class_isometric == e.extended
            && e.frames_valid == e.extended
            && e.b_maps_extendible == 0;
    }
    if let Some(a) = &apartments {
        passed &= a.images_not_apartments == 0 && a.apartments_not_images == 0;
    }
    let conclusive = match mode {
        "exhaustive" => stats.complete,
        _ => config.sample.is_some_and(|s| tally.maps as usize >= s.maps),
    };
    Ok(MainTheoremReport {
        n,
        m,
        sign,
        mode,
        symmetry_breaking: config.symmetry_breaking && mode == "exhaustive",
        seed: config.seed,
        search: stats,
        maps: tally.maps,
        witness_pdim: n as i32 - m as i32 - 1,
        containment_failures: tally.containment_failures,
        witness_inconsistent: tally.witness_inconsistent,
        distinct_images: distinct,
        maps_per_image: per_image,
        images_recognized: recognized,
        images_rejected: distinct - recognized,
        recognizer_witness_mismatches: mismatches,
        classification,
        extension,
        apartments,
        image_set_digest: digest.hex(),
        failures,
        passed,
        conclusive,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundTripReport {
    pub frames: u64,
    pub classified_a: u64,
    pub extension_is_dual_apartment: u64,
    pub frame_recovered: u64,
}

/// Apartment maps of the standard frame and `count - 1` seeded random frames:
/// each must be of type (A), extend to its dual apartment, and give back its frame.
pub fn apartment_round_trips(geo: &PolarGeometry, sign: Sign, count: usize, seed: u64) -> Result<RoundTripReport> {
    let n = geo.n();
    let cliques = halfcube_cliques(n)?;
    let mut rng_seed = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = RoundTripReport {
        frames: 0,
        classified_a: 0,
        extension_is_dual_apartment: 0,
        frame_recovered: 0,
    };
    for i in 0..count {
        let frame = if i == 0 {
            standard_frame(n)?
        } else {
            random_frame(geo.model(), rand::Rng::gen(&mut rng_seed))
        };
        let ap = apartment_of(geo, &frame, Level::HalfSpin(sign))?;
        let mut map = vec![0u32; ap.members.len()];
        for (&v, &w) in ap.members.iter().zip(&ap.words) {
            map[halfcube_index(w) as usize] = v as u32;
        }
        rep.frames += 1;
        let v = classify_ab(geo, sign, &cliques, &map)?.verdict;
        if v != AbVerdict::A {
            continue;
        }
        rep.classified_a += 1;
        let ext = extend_to_hypercube(geo, sign, &map, v, None)?;
        let mut got = ext.clone();
        got.sort_unstable();
        if got == apartment_of(geo, &frame, Level::Dual)?.members {
            rep.extension_is_dual_apartment += 1;
        }
        let rf = recover_frame(geo, &ext)?;
        if rf.passed() && rf.frame().canonical() == frame.canonical() {
            rep.frame_recovered += 1;
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorollaryReport {
    /// Exhaustive pass without symmetry breaking.
    pub full: Option<MainTheoremReport>,
    /// Exhaustive pass keeping one map per image.
    pub symmetry_broken: MainTheoremReport,
    /// Both passes found the same set of images.
    pub same_images: Option<bool>,
    pub round_trips: RoundTripReport,
    pub passed: bool,
    pub conclusive: bool,
}

/// The rank-four case: the main theorem pass with classification, extension
/// and frame recovery, with and without symmetry breaking (`full = false`
/// skips the slow pass), plus apartment round trips.
pub fn corollary_suite(geo: &PolarGeometry, sign: Sign, seed: u64, full: bool) -> Result<CorollaryReport> {
    if geo.n() != 4 {
        return Err(Error::Precondition("the corollary suite runs in rank 4".into()));
    }
    let base = SearchConfig {
        seed,
        ..SearchConfig::exhaustive(Kind::Isometric)
    };
    let full_run = if full {
        Some(verify_main_theorem(geo, sign, 4, &base.clone().symmetric(false))?)
    } else {
        None
    };
    let broken = verify_main_theorem(geo, sign, 4, &base.symmetric(true))?;
    let same_images = full_run.as_ref().map(|f| f.image_set_digest == broken.image_set_digest);
    let round_trips = apartment_round_trips(geo, sign, 16, seed)?;
    let rt_ok = round_trips.frames == round_trips.classified_a
        && round_trips.frames == round_trips.extension_is_dual_apartment
        && round_trips.frames == round_trips.frame_recovered;
    let passed = broken.passed && full_run.as_ref().is_none_or(|f| f.passed) && same_images != Some(false) && rt_ok;
    let conclusive = broken.conclusive && full_run.as_ref().is_none_or(|f| f.conclusive);
    Ok(CorollaryReport {
        full: full_run,
        symmetry_broken: broken,
        same_images,
        round_trips,
        passed,
        conclusive,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HypercubeTheoremReport {
    pub n: usize,
    pub m: usize,
    pub mode: &'static str,
    pub seed: u64,
    pub search: SearchStats,
    pub maps: u64,
    pub witness_pdim: i32,
    pub containment_failures: u64,
    pub distinct_images: u64,
    pub images_recognized: u64,
    pub images_rejected: u64,
    pub image_set_digest: String,
    pub failures: Vec<String>,
    pub passed: bool,
    pub conclusive: bool,
}

/// Isometric embeddings of `H_m` into the dual polar graph: every image must
/// be a dual apartment of the parabolic subspace over the antipodal meet.
pub fn verify_hypercube_theorem(geo: &PolarGeometry, m: usize, config: &SearchConfig) -> Result<HypercubeTheoremReport> {
    let n = geo.n();
    if m < 1 || m > n {
        return Err(Error::Precondition(format!("need 1 <= m <= n, got m = {m}, n = {n}")));
    }
    if geo.generators().len() > 2 * TABLE_HOST_LIMIT {
        return Err(Error::Budget {
            what: "dual polar graph vertices".into(),
            needed: geo.generators().len() as u64,
            limit: 2 * TABLE_HOST_LIMIT as u64,
        });
    }
    let dual = build_dual_polar_graph(geo)?;
    let host = TableHost::new(dual.dm.clone());
    let mut pattern = Pattern::new(&build_hypercube(m)?)?;
    if config.symmetry_breaking && config.sample.is_none() {
        pattern = pattern.with_symmetry_breaking();
    }
    let opp: Vec<(usize, usize)> = pattern.dm().opposite_pairs().collect();
    let (a, b) = (opp[0], opp[opp.len() - 1]);
    let want = n as i32 - m as i32 - 1;
    let check = |f: &[u32], t: &mut (u64, u64, HashMap<ImageKey, u64>, Vec<String>)| {
        t.0 += 1;
        let meet = |(v, w): (usize, usize)| geo.generator(f[v] as usize).intersection(geo.generator(f[w] as usize));
        let mm = meet(a);
        let ok = mm.pdim() == want
            && f.iter().all(|&x| geo.generator(x as usize).contains_subspace(&mm))
            && meet(b) == mm;
        if !ok {
            t.1 += 1;
            if t.3.len() < KEEP_FAILURES {
                t.3.push(format!("antipodal meet check failed (map {f:?})"));
            }
        }
        *t.2.entry(ImageKey::new(f)).or_default() += 1;
    };
    type T = (u64, u64, HashMap<ImageKey, u64>, Vec<String>);
    let (tally, stats, mode): (T, SearchStats, &'static str) = match config.sample {
        Some(s) => {
            let (maps, stats) = sample_embeddings(&pattern, &host, Kind::Isometric, s, config.seed);
            let mut t: T = Default::default();
            for f in &maps {
                check(f, &mut t);
            }
            (t, stats, "sampled")
        }
        None => {
            let cfg = SearchConfig {
                kind: Kind::Isometric,
                ..config.clone()
            };
            let (t, stats) = search_fold(
                &pattern,
                &host,
                &cfg,
                T::default,
                |t, f| {
                    check(f, t);
                    true
                },
                |mut x, y| {
                    x.0 += y.0;
                    x.1 += y.1;
                    for (k, c) in y.2 {
                        *x.2.entry(k).or_default() += c;
                    }
                    for f in y.3 {
                        if x.3.len() < KEEP_FAILURES {
                            x.3.push(f);
                        }
                    }
                    x
                },
            );
            (t, stats, "exhaustive")
        }
    };
    let (maps, contain_fail, images, mut failures) = tally;
    let mut keys: Vec<ImageKey> = images.into_keys().collect();
    keys.sort_unstable();
    let mut digest = Fnv64::default();
    for k in &keys {
        for v in k.members() {
            digest.write_u32(v as u32);
        }
        digest.write_u8(0xff);
    }
    let verdicts: Vec<Option<String>> = keys
        .par_iter()
        .map(|k| {
            let members = k.members();
            match recognize_dual_apartment(geo, &members) {
                Ok(v) => match v.recognized() {
                    Some(r) if r.m.pdim() == want => None,
                    Some(r) => Some(format!("image {members:?} recognized over pdim {}", r.m.pdim())),
                    None => Some(format!("image {members:?} is not a dual apartment")),
                },
                Err(e) => Some(format!("recognition of {members:?} failed: {e}")),
            }
        })
        .collect();
    let rejected = verdicts.iter().filter(|v| v.is_some()).count() as u64;
    for msg in verdicts.into_iter().flatten() {
        if failures.len() < KEEP_FAILURES {
            failures.push(msg);
        }
    }
    let conclusive = match mode {
        "exhaustive" => stats.complete,
        _ => config.sample.is_some_and(|s| maps as usize >= s.maps),
    };
    Ok(HypercubeTheoremReport {
        n,
        m,
        mode,
        seed: config.seed,
        search: stats,
        maps,
        witness_pdim: want,
        containment_failures: contain_fail,
        distinct_images: keys.len() as u64,
        images_recognized: keys.len() as u64 - rejected,
        images_rejected: rejected,
        image_set_digest: digest.hex(),
        failures,
        passed: maps > 0 && contain_fail == 0 && rejected == 0,
        conclusive,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OpenProbeReport {
    pub n: usize,
    pub m: usize,
    pub sign: Sign,
    pub mode: &'static str,
    pub symmetry_breaking: bool,
    pub seed: u64,
    pub search: SearchStats,
    pub maps_examined: u64,
    pub a_maps: u64,
    pub b_maps: u64,
    pub classification_failures: u64,
    /// Up to five (B) maps found.
    pub b_examples: Vec<Vec<u32>>,
    /// A (B) map was found.
    pub finding: bool,
    /// The search stopped early without a finding.
    pub inconclusive: bool,
}

/// Looks for isometric `½H_m` embeddings of type (B), `m > 4`. Odd `m` runs the
/// search alone. Absence of a finding is reported only for the searched range.
pub fn open_problem_probe(geo: &PolarGeometry, sign: Sign, m: usize, config: &SearchConfig) -> Result<OpenProbeReport> {
    let n = geo.n();
    if m <= 4 || m > n {
        return Err(Error::Precondition(format!("the probe needs 4 < m <= n, got m = {m}, n = {n}")));
    }
    let classify = m % 2 == 0;
    let cliques = if classify { halfcube_cliques(m)? } else { Vec::new() };
    let mut pattern = Pattern::new(&build_halfcube(m)?)?;
    if config.symmetry_breaking && config.sample.is_none() {
        pattern = pattern.with_symmetry_breaking();
    }
    let (host, _) = halfspin_host(geo, sign)?;
    type T = (u64, u64, u64, u64, Vec<Vec<u32>>);
    let check = |f: &[u32], t: &mut T| {
        t.0 += 1;
        if !classify {
            return;
        }
        match classify_ab(geo, sign, &cliques, f) {
            Ok(c) if c.verdict == AbVerdict::A => t.1 += 1,
            Ok(_) => {
                t.2 += 1;
                if t.4.len() < 5 {
                    t.4.push(f.to_vec());
                }
            }
            Err(_) => t.3 += 1,
        }
    };
    let (tally, stats, mode) = match config.sample {
        Some(s) => {
            let (maps, stats) = sample_embeddings(&pattern, &host, Kind::Isometric, s, config.seed);
            let mut t: T = Default::default();
            for f in &maps {
                check(f, &mut t);
            }
            (t, stats, "sampled")
        }
        None => {
            let cfg = SearchConfig {
                kind: Kind::Isometric,
                ..config.clone()
            };
            let (t, stats) = search_fold(
                &pattern,
                &host,
                &cfg,
                T::default,
                |t, f| {
                    check(f, t);
                    true
                },
                |mut x, y| {
                    x.0 += y.0;
                    x.1 += y.1;
                    x.2 += y.2;
                    x.3 += y.3;
                    for e in y.4 {
                        if x.4.len() < 5 {
                            x.4.push(e);
                        }
                    }
                    x
                },
            );
            (t, stats, "exhaustive")
        }
    };
    let finding = tally.2 > 0;
    let complete = mode == "exhaustive" && stats.complete;
    Ok(OpenProbeReport {
        n,
        m,
        sign,
        mode: if classify { mode } else { "search-only" },
        symmetry_breaking: config.symmetry_breaking && mode == "exhaustive",
        seed: config.seed,
        search: stats,
        maps_examined: tally.0,
        a_maps: tally.1,
        b_maps: tally.2,
        classification_failures: tally.3,
        b_examples: tally.4,
        finding,
        inconclusive: !finding && !complete,
    })
}


/// Pattern graphs accepted by [`run_search`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatternSpec {
    Hypercube(usize),
    Halfcube(usize),
}

impl std::str::FromStr for PatternSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("pattern {s:?}: expected H<m> or halfH<m>"));
        let (half, rest) = match s.strip_prefix("halfH") {
            Some(r) => (true, r),
            None => (false, s.strip_prefix('H').ok_or_else(bad)?),
        };
        let m: usize = rest.parse().map_err(|_| bad())?;
        Ok(if half { PatternSpec::Halfcube(m) } else { PatternSpec::Hypercube(m) })
    }
}

impl std::fmt::Display for PatternSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PatternSpec::Hypercube(m) => write!(f, "H{m}"),
            PatternSpec::Halfcube(m) => write!(f, "halfH{m}"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerdictCounts {
    pub a: u64,
    pub b: u64,
    pub failures: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KeptSolution {
    /// Host vertex of each pattern vertex.
    pub images: Vec<u32>,
    pub verdict: Option<&'static str>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchReport {
    pub pattern: String,
    pub host: String,
    pub n: usize,
    pub family: Option<Sign>,
    pub kind: Kind,
    pub mode: &'static str,
    pub symmetry_breaking: bool,
    pub seed: u64,
    pub search: SearchStats,
    pub solutions: u64,
    /// Solutions failing the pairwise check of their kind.
    pub check_failures: u64,
    /// (A)/(B) verdicts, for half-cubes with `4 <= m <= n` in a half-spin graph.
    pub verdicts: Option<VerdictCounts>,
    /// The first solutions in search order.
    pub kept: Vec<KeptSolution>,
    pub conclusive: bool,
}

#[derive(Default)]
struct SearchTally {
    solutions: u64,
    check_failures: u64,
    verdicts: VerdictCounts,
    kept: Vec<KeptSolution>,
}

/// Searches `pattern` in the half-spin graph of `sign` (half-cubes) or the
/// dual polar graph (hypercubes), checks every solution and keeps the first `keep`.
pub fn run_search(geo: &PolarGeometry, pattern: PatternSpec, sign: Sign, config: &SearchConfig, keep: usize) -> Result<SearchReport> {
    let n = geo.n();
    let (pg, half) = match pattern {
        PatternSpec::Hypercube(m) => (build_hypercube(m)?, false),
        PatternSpec::Halfcube(m) => (build_halfcube(m)?, true),
    };
    let mut pat = Pattern::new(&pg)?;
    if config.symmetry_breaking && config.sample.is_none() {
        pat = pat.with_symmetry_breaking();
    }
    let (host, host_name) = if half {
        (halfspin_host(geo, sign)?.0, format!("halfspin{}(D{n})", sign))
    } else {
        if geo.generators().len() > 2 * TABLE_HOST_LIMIT {
            return Err(Error::Budget {
                what: "dual polar graph vertices".into(),
                needed: geo.generators().len() as u64,
                limit: 2 * TABLE_HOST_LIMIT as u64,
            });
        }
        (AnyHost::Table(TableHost::new(build_dual_polar_graph(geo)?.dm)), format!("dual(D{n})"))
    };
    let classify = match pattern {
        PatternSpec::Halfcube(m) => m >= 4 && m <= n,
        PatternSpec::Hypercube(_) => false,
    };
    let index = if classify && n == 4 {
        let hs = build_halfspin_graph(geo, sign)?;
        let census = clique_census(geo, &hs)?;
        Some(HostCliqueIndex::new(sign, hs.graph.vertex_count(), census.cliques)?)
    } else {
        None
    };
    let m = match pattern {
        PatternSpec::Hypercube(m) | PatternSpec::Halfcube(m) => m,
    };
    let ctx = Ctx {
        geo,
        sign,
        n,
        m,
        cliques: if classify { halfcube_cliques(m)? } else { Vec::new() },
        index,
        tables: None,
        opposite: [(0, 0); 2],
        swap: None,
        classify,
        extend: false,
    };
    let pdm = pat.dm().clone();
    let check = |t: &mut SearchTally, f: &[u32]| {
        t.solutions += 1;
        let ok = super::check_embedding(&pdm, &host, f, config.kind).map(|c| c.ok).unwrap_or(false);
        t.check_failures += !ok as u64;
        let verdict = if classify {
            match ctx.verdict(f) {
                Ok(AbVerdict::A) => {
                    t.verdicts.a += 1;
                    Some("A")
                }
                Ok(AbVerdict::B) => {
                    t.verdicts.b += 1;
                    Some("B")
                }
                Err(_) => {
                    t.verdicts.failures += 1;
                    Some("error")
                }
            }
        } else {
            None
        };
        if t.kept.len() < keep {
            t.kept.push(KeptSolution {
                images: f.to_vec(),
                verdict,
            });
        }
    };
    let (tally, stats, mode) = match config.sample {
        Some(s) => {
            let (maps, stats) = sample_embeddings(&pat, &host, config.kind, s, config.seed);
            let mut t = SearchTally::default();
            for f in &maps {
                check(&mut t, f);
            }
            (t, stats, "sampled")
        }
        None => {
            let (t, stats) = search_fold(
                &pat,
                &host,
                config,
                SearchTally::default,
                |t, f| {
                    check(t, f);
                    true
                },
                |mut a, b| {
                    a.solutions += b.solutions;
                    a.check_failures += b.check_failures;
                    a.verdicts.a += b.verdicts.a;
                    a.verdicts.b += b.verdicts.b;
                    a.verdicts.failures += b.verdicts.failures;
                    let room = keep - a.kept.len();
                    a.kept.extend(b.kept.into_iter().take(room));
                    a
                },
            );
            (t, stats, "exhaustive")
        }
    };
    let conclusive = match config.sample {
        Some(s) => tally.solutions as usize >= s.maps,
        None => stats.complete || config.max_solutions.is_some_and(|c| tally.solutions >= c),
    };
    Ok(SearchReport {
        pattern: pattern.to_string(),
        host: host_name,
        n,
        family: half.then_some(sign),
        kind: config.kind,
        mode,
        symmetry_breaking: config.symmetry_breaking && mode == "exhaustive",
        seed: config.seed,
        search: stats,
        solutions: tally.solutions,
        check_failures: tally.check_failures,
        verdicts: classify.then_some(tally.verdicts),
        kept: tally.kept,
        conclusive,
    })
}
