use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::host::{Host, Kind, TableHost};
use crate::graphcore::{all_pairs_distances, DistanceMatrix, FiniteGraph};
use crate::Result;

/// Randomized search settings: one map per attempt at most.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Sample {
    /// Maps wanted.
    pub maps: usize,
    /// Attempts allowed in total.
    pub max_attempts: usize,
    /// Search nodes allowed per attempt.
    pub node_budget: u64,
}

impl Sample {
    pub fn new(maps: usize) -> Self {
        Sample {
            maps,
            max_attempts: maps.saturating_mul(20).max(1),
            node_budget: 2_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchConfig {
    pub kind: Kind,
    /// Keep one map per image (one per orbit of pattern automorphisms).
    pub symmetry_breaking: bool,
    pub max_solutions: Option<u64>,
    #[serde(skip)]
    pub time_budget: Option<Duration>,
    pub seed: u64,
    pub sample: Option<Sample>,
}

impl SearchConfig {
    pub fn exhaustive(kind: Kind) -> Self {
        SearchConfig {
            kind,
            symmetry_breaking: false,
            max_solutions: None,
            time_budget: None,
            seed: 0,
            sample: None,
        }
    }

    pub fn symmetric(mut self, on: bool) -> Self {
        self.symmetry_breaking = on;
        self
    }

    pub fn sampled(kind: Kind, sample: Sample, seed: u64) -> Self {
        SearchConfig {
            kind,
            symmetry_breaking: false,
            max_solutions: None,
            time_budget: None,
            seed,
            sample: Some(sample),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    /// Partial assignments extended.
    pub nodes: u64,
    pub solutions: u64,
    /// Every map was visited (always false for sampling).
    pub complete: bool,
    pub stop_reason: Option<String>,
    /// Pattern automorphism count when symmetry breaking was used.
    pub automorphisms: Option<u64>,
    pub attempts: Option<u64>,
}

/// A pattern graph prepared for search: a connected vertex order, the metric
/// constraints of each position against the earlier ones, and optionally
/// ordering constraints that keep one map per automorphism orbit.
#[derive(Clone, Debug)]
pub struct Pattern {
    dm: DistanceMatrix,
    order: Vec<u32>,
    pos: Vec<u32>,
    /// For each position, `(earlier position, pattern distance)`.
    anchors: Vec<Vec<(u32, u32)>>,
    /// For each position, earlier positions whose image must be smaller.
    below: Vec<Vec<u32>>,
    automorphisms: Option<u64>,
}

impl Pattern {
    pub fn new(g: &FiniteGraph) -> Result<Self> {
        let dm = all_pairs_distances(g)?;
        Ok(Self::from_dm(g, dm))
    }

    pub fn from_dm(g: &FiniteGraph, dm: DistanceMatrix) -> Self {
        let n = g.vertex_count();
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        if n > 0 {
            seen[0] = true;
            order.push(0u32);
        }
        let mut head = 0;
        while head < order.len() {
            let v = order[head] as usize;
            head += 1;
            for &w in g.neighbors(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    order.push(w);
                }
            }
        }
        let mut pos = vec![0u32; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v as usize] = i as u32;
        }
        let anchors = (0..n)
            .map(|k| {
                (0..k)
                    .map(|j| (j as u32, dm.get(order[k] as usize, order[j] as usize)))
                    .collect()
            })
            .collect();
        Pattern {
            dm,
            order,
            pos,
            anchors,
            below: vec![Vec::new(); n],
            automorphisms: None,
        }
    }

    pub fn order(&self) -> usize {
        self.order.len()
    }

    pub fn dm(&self) -> &DistanceMatrix {
        &self.dm
    }

    pub fn automorphism_count(&self) -> Option<u64> {
        self.automorphisms
    }

    /// All automorphisms of the pattern, as vertex images.
    pub fn automorphisms(&self) -> Vec<Vec<u32>> {
        let host = TableHost::new(self.dm.clone());
        let plain = Pattern {
            below: vec![Vec::new(); self.order()],
            automorphisms: None,
            ..self.clone()
        };
        let (all, _) = search_fold(
            &plain,
            &host,
            &SearchConfig::exhaustive(Kind::Isometric),
            Vec::new,
            |acc: &mut Vec<Vec<u32>>, f: &[u32]| {
                acc.push(f.to_vec());
                true
            },
            |mut a, b| {
                a.extend(b);
                a
            },
        );
        all
    }

    /// Adds the orbit ordering constraints. Afterwards each orbit of maps
    /// under pattern automorphisms has exactly one member satisfying them.
    pub fn with_symmetry_breaking(mut self) -> Self {
        let autos = self.automorphisms();
        let n = self.order();
        let mut orbit: Vec<Vec<u32>> = vec![Vec::new(); n];
        for a in &autos {
            // the first moved position k: a fixes positions 0..k pointwise
            if let Some(k) = (0..n).find(|&k| a[self.order[k] as usize] != self.order[k]) {
                orbit[k].push(a[self.order[k] as usize]);
            }
        }
        let mut below = vec![Vec::new(); n];
        for (k, ws) in orbit.iter_mut().enumerate() {
            ws.sort_unstable();
            ws.dedup();
            for &w in ws.iter() {
                below[self.pos[w as usize] as usize].push(k as u32);
            }
        }
        self.below = below;
        self.automorphisms = Some(autos.len() as u64);
        self
    }
}

struct Shared {
    stop: AtomicBool,
    found: AtomicU64,
    deadline: Option<Instant>,
    cap: Option<u64>,
    reason: std::sync::Mutex<Option<String>>,
}

impl Shared {
    fn halt(&self, why: &str) {
        self.stop.store(true, Ordering::Relaxed);
        let mut r = self.reason.lock().unwrap();
        if r.is_none() {
            *r = Some(why.to_string());
        }
    }
}

struct Dfs<'a, H: Host + ?Sized, V> {
    pat: &'a Pattern,
    host: &'a H,
    classes: Vec<Vec<(u32, u32)>>,
    vals: Vec<u32>,
    map: Vec<u32>,
    bufs: Vec<Vec<u32>>,
    anchors: Vec<(u32, u32)>,
    nodes: u64,
    solutions: u64,
    shared: &'a Shared,
    visit: V,
}

impl<H: Host + ?Sized, V: FnMut(&[u32]) -> bool> Dfs<'_, H, V> {
    fn run(&mut self, depth: usize) {
        let n = self.pat.order();
        if depth == n {
            for (k, &v) in self.pat.order.iter().enumerate() {
                self.map[v as usize] = self.vals[k];
            }
            self.solutions += 1;
            if !(self.visit)(&self.map) {
                self.shared.halt("stopped by visitor");
            }
            if let Some(cap) = self.shared.cap {
                if self.shared.found.fetch_add(1, Ordering::Relaxed) + 1 >= cap {
                    self.shared.halt("solution cap reached");
                }
            }
            return;
        }
        self.nodes += 1;
        if self.nodes & 0x3fff == 0 {
            if self.shared.stop.load(Ordering::Relaxed) {
                return;
            }
            if self.shared.deadline.is_some_and(|d| Instant::now() >= d) {
                self.shared.halt("time budget exhausted");
                return;
            }
        }
        self.anchors.clear();
        for &(p, c) in &self.classes[depth] {
            self.anchors.push((self.vals[p as usize], c));
        }
        let mut buf = std::mem::take(&mut self.bufs[depth]);
        self.host.candidates(&self.anchors, Kind::Isometric, &mut buf);
        let below = &self.pat.below[depth];
        for &x in &buf {
            if below.iter().any(|&k| self.vals[k as usize] >= x) {
                continue;
            }
            self.vals[depth] = x;
            self.run(depth + 1);
            if self.shared.stop.load(Ordering::Relaxed) {
                break;
            }
        }
        self.bufs[depth] = buf;
    }
}

/// Anchor classes per position under `kind`.
fn classes(pat: &Pattern, kind: Kind) -> Vec<Vec<(u32, u32)>> {
    pat.anchors
        .iter()
        .map(|a| a.iter().map(|&(p, d)| (p, kind.class(d))).collect())
        .collect()
}

struct KindHost<'a, H: Host + ?Sized> {
    inner: &'a H,
    kind: Kind,
}

impl<H: Host + ?Sized> Host for KindHost<'_, H> {
    fn order(&self) -> usize {
        self.inner.order()
    }
    fn distance(&self, u: usize, v: usize) -> u32 {
        self.inner.distance(u, v)
    }
    #[inline]
    fn candidates(&self, anchors: &[(u32, u32)], _: Kind, out: &mut Vec<u32>) {
        self.inner.candidates(anchors, self.kind, out)
    }
}

/// Exhaustive search folding every map into per-branch accumulators.
///
/// `visit` receives the map indexed by pattern vertex and returns false to
/// stop the search. Branches are split on the image of the first pattern
/// vertex and merged in increasing order, so results are deterministic when
/// `visit` is. A solution cap forces a sequential run.
pub fn search_fold<H, A, I, V, M>(
    pat: &Pattern,
    host: &H,
    config: &SearchConfig,
    init: I,
    visit: V,
    merge: M,
) -> (A, SearchStats)
where
    H: Host + ?Sized,
    A: Send,
    I: Fn() -> A + Sync,
    V: Fn(&mut A, &[u32]) -> bool + Sync,
    M: Fn(A, A) -> A,
{
    let shared = Shared {
        stop: AtomicBool::new(false),
        found: AtomicU64::new(0),
        deadline: config.time_budget.map(|d| Instant::now() + d),
        cap: config.max_solutions,
        reason: std::sync::Mutex::new(None),
    };
    let kh = KindHost {
        inner: host,
        kind: config.kind,
    };
    let cls = classes(pat, config.kind);
    let n = pat.order();
    let branch = |root: u32| -> (A, u64, u64) {
        let mut acc = init();
        if n == 0 {
            return (acc, 0, 0);
        }
        let mut dfs = Dfs {
            pat,
            host: &kh,
            classes: cls.clone(),
            vals: vec![0; n],
            map: vec![0; n],
            bufs: vec![Vec::new(); n],
            anchors: Vec::with_capacity(n),
            nodes: 1,
            solutions: 0,
            shared: &shared,
            visit: |f: &[u32]| visit(&mut acc, f),
        };
        dfs.vals[0] = root;
        if shared.deadline.is_some_and(|d| Instant::now() >= d) {
            shared.halt("time budget exhausted");
        }
        if !shared.stop.load(Ordering::Relaxed) {
            dfs.run(1);
        }
        let (nodes, sols) = (dfs.nodes, dfs.solutions);
        drop(dfs);
        (acc, nodes, sols)
    };
    let roots: Vec<u32> = if n == 0 { Vec::new() } else { (0..host.order() as u32).collect() };
    let mut stats = SearchStats {
        automorphisms: pat.automorphisms,
        ..Default::default()
    };
    let mut acc: Option<A> = None;
    let mut absorb = |parts: Vec<(A, u64, u64)>, acc: &mut Option<A>| {
        for (a, nodes, sols) in parts {
            stats.nodes += nodes;
            stats.solutions += sols;
            *acc = Some(match acc.take() {
                None => a,
                Some(prev) => merge(prev, a),
            });
        }
    };
    if config.max_solutions.is_some() {
        for &r in &roots {
            if shared.stop.load(Ordering::Relaxed) {
                break;
            }
            absorb(vec![branch(r)], &mut acc);
        }
    } else {
        // merge chunk by chunk to bound the memory held by unmerged branches
        let chunk = (4 * rayon::current_num_threads()).max(8);
        for rs in roots.chunks(chunk) {
            let parts: Vec<(A, u64, u64)> = rs.par_iter().map(|&r| branch(r)).collect();
            absorb(parts, &mut acc);
        }
    }
    stats.stop_reason = shared.reason.into_inner().unwrap();
    stats.complete = stats.stop_reason.is_none();
    (acc.unwrap_or_else(init), stats)
}

/// Collects maps, up to `max_solutions` when set.
pub fn search_embeddings<H: Host + ?Sized>(pat: &Pattern, host: &H, config: &SearchConfig) -> (Vec<Vec<u32>>, SearchStats) {
    if let Some(s) = config.sample {
        return sample_embeddings(pat, host, config.kind, s, config.seed);
    }
    let cap = config.max_solutions.unwrap_or(u64::MAX) as usize;
    search_fold(
        pat,
        host,
        config,
        Vec::new,
        |acc: &mut Vec<Vec<u32>>, f| {
            if acc.len() < cap {
                acc.push(f.to_vec());
            }
            true
        },
        |mut a, b| {
            a.extend(b);
            a
        },
    )
}

/// One randomized depth-first attempt: candidates are shuffled at every level
/// and the first complete map is returned.
fn attempt<H: Host + ?Sized>(pat: &Pattern, host: &H, cls: &[Vec<(u32, u32)>], kind: Kind, rng: &mut ChaCha8Rng, budget: u64) -> (Option<Vec<u32>>, u64) {
    let n = pat.order();
    let mut vals = vec![0u32; n];
    let mut nodes = 0u64;
    let mut stack: Vec<Vec<u32>> = Vec::with_capacity(n);
    let mut anchors = Vec::with_capacity(n);
    vals[0] = rng.gen_range(0..host.order() as u32);
    let fill = |depth: usize, vals: &[u32], anchors: &mut Vec<(u32, u32)>, rng: &mut ChaCha8Rng| {
        anchors.clear();
        anchors.extend(cls[depth].iter().map(|&(p, c)| (vals[p as usize], c)));
        let mut c = Vec::new();
        host.candidates(anchors, kind, &mut c);
        c.shuffle(rng);
        c
    };
    if n == 1 {
        return (Some(vals), 1);
    }
    stack.push(fill(1, &vals, &mut anchors, rng));
    loop {
        let depth = stack.len();
        let Some(top) = stack.last_mut() else { break };
        match top.pop() {
            None => {
                stack.pop();
            }
            Some(x) => {
                nodes += 1;
                if nodes > budget {
                    return (None, nodes);
                }
                vals[depth] = x;
                if depth + 1 == n {
                    let mut map = vec![0u32; n];
                    for (k, &v) in pat.order.iter().enumerate() {
                        map[v as usize] = vals[k];
                    }
                    return (Some(map), nodes);
                }
                let next = fill(depth + 1, &vals, &mut anchors, rng);
                stack.push(next);
            }
        }
    }
    (None, nodes)
}

/// Seeded sampling. Attempt `i` draws from ChaCha8 stream `i` of `seed`, so
/// the outcome does not depend on scheduling.
pub fn sample_embeddings<H: Host + ?Sized>(pat: &Pattern, host: &H, kind: Kind, s: Sample, seed: u64) -> (Vec<Vec<u32>>, SearchStats) {
    let cls = classes(pat, kind);
    let mut maps = Vec::new();
    let mut stats = SearchStats::default();
    let mut next = 0usize;
    if pat.order() == 0 || host.order() == 0 {
        stats.stop_reason = Some("empty pattern or host".into());
        return (maps, stats);
    }
    while maps.len() < s.maps && next < s.max_attempts {
        let batch = (s.maps - maps.len()).min(s.max_attempts - next);
        let results: Vec<(Option<Vec<u32>>, u64)> = (next..next + batch)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                attempt(pat, host, &cls, kind, &mut rng, s.node_budget)
            })
            .collect();
        next += batch;
        for (m, nodes) in results {
            stats.nodes += nodes;
            if let Some(m) = m {
                maps.push(m);
            }
        }
    }
    stats.solutions = maps.len() as u64;
    stats.attempts = Some(next as u64);
    stats.complete = false;
    if maps.len() < s.maps {
        stats.stop_reason = Some(format!("found {} of {} maps in {} attempts", maps.len(), s.maps, next));
    }
    (maps, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphcore::{build_halfcube, build_hypercube, complete_graph};

    #[test]
    fn automorphism_counts() {
        for (g, want) in [
            (build_hypercube(3).unwrap(), 48),
            (build_halfcube(4).unwrap(), 384),
            (complete_graph(4), 24),
        ] {
            let p = Pattern::new(&g).unwrap();
            assert_eq!(p.automorphisms().len(), want);
        }
    }

    #[test]
    fn symmetry_breaking_keeps_one_per_orbit() {
        let pat = build_hypercube(2).unwrap();
        let host = build_hypercube(3).unwrap();
        let h = TableHost::new(all_pairs_distances(&host).unwrap());
        let plain = Pattern::new(&pat).unwrap();
        let (all, st) = search_embeddings(&plain, &h, &SearchConfig::exhaustive(Kind::Isometric));
        assert!(st.complete);
        // 6 square faces, 8 automorphisms each
        assert_eq!(all.len(), 48);
        let broken = plain.clone().with_symmetry_breaking();
        let (one, st) = search_embeddings(&broken, &h, &SearchConfig::exhaustive(Kind::Isometric));
        assert_eq!(st.automorphisms, Some(8));
        assert_eq!(one.len(), 6);
        let mut imgs: Vec<Vec<u32>> = one
            .iter()
            .map(|m| {
                let mut v = m.clone();
                v.sort_unstable();
                v
            })
            .collect();
        imgs.sort();
        imgs.dedup();
        assert_eq!(imgs.len(), 6);
    }

    #[test]
    fn weak_versus_isometric() {
        // K4 has no induced 4-cycle
        let c4 = build_hypercube(2).unwrap();
        let h = TableHost::new(all_pairs_distances(&complete_graph(4)).unwrap());
        let p = Pattern::new(&c4).unwrap();
        let (w, _) = search_embeddings(&p, &h, &SearchConfig::exhaustive(Kind::Weak));
        assert!(w.is_empty());
        // every induced 4-cycle of H3 is a face
        let h3 = TableHost::new(all_pairs_distances(&build_hypercube(3).unwrap()).unwrap());
        let (w, _) = search_embeddings(&p, &h3, &SearchConfig::exhaustive(Kind::Weak));
        let (i, _) = search_embeddings(&p, &h3, &SearchConfig::exhaustive(Kind::Isometric));
        assert_eq!(w.len(), i.len());
    }

    #[test]
    fn caps_and_budgets() {
        let p = Pattern::new(&build_halfcube(4).unwrap()).unwrap();
        let h = TableHost::new(all_pairs_distances(&build_halfcube(6).unwrap()).unwrap());
        let mut cfg = SearchConfig::exhaustive(Kind::Weak);
        cfg.max_solutions = Some(10);
        let (maps, st) = search_embeddings(&p, &h, &cfg);
        assert_eq!(maps.len(), 10);
        assert!(!st.complete);
        cfg.max_solutions = None;
        cfg.time_budget = Some(Duration::ZERO);
        let (_, st) = search_embeddings(&p, &h, &cfg);
        assert!(!st.complete);
    }

    #[test]
    fn sampling_is_reproducible() {
        let p = Pattern::new(&build_halfcube(4).unwrap()).unwrap();
        let h = TableHost::new(all_pairs_distances(&build_halfcube(6).unwrap()).unwrap());
        let cfg = SearchConfig::sampled(Kind::Weak, Sample::new(7), 42);
        let (a, sa) = search_embeddings(&p, &h, &cfg);
        let (b, _) = search_embeddings(&p, &h, &cfg);
        assert_eq!(a.len(), 7);
        assert_eq!(a, b);
        assert!(!sa.complete);
        let cfg = SearchConfig::sampled(Kind::Weak, Sample::new(7), 43);
        assert_ne!(search_embeddings(&p, &h, &cfg).0, a);
    }
}
