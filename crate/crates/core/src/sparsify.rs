//! Keyed edge multisets and spectral sparsification by resistance sampling.
//!
//! `EdgeBag` stores edges under stable integer keys and keeps per-pair
//! aggregates with multiplicity counts, so a pair disappears exactly when its
//! last edge is removed. The periodic backend keeps one independent keep/drop
//! decision per key: between resamples, removals take out exactly what that
//! key contributed and new keys enter at full weight.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng as _;

use crate::graph::{MultiGraph, WeightMode};
use crate::oracle::{laplacian_from_edges, pinv, matrix_components};
use crate::rng::{stream, Domain};
use crate::walk::HEdge;

#[derive(Clone, Debug, Default)]
pub struct EdgeBag {
    edges: Vec<Option<HEdge>>,
    agg: BTreeMap<(usize, usize), (u32, f64)>,
    len: usize,
}

fn pair(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl EdgeBag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, key: usize) -> Option<&HEdge> {
        self.edges.get(key).and_then(Option::as_ref)
    }

    /// Self-loops are stored but never aggregated.
    pub fn insert(&mut self, key: usize, e: HEdge) {
        if self.edges.len() <= key {
            self.edges.resize(key + 1, None);
        }
        assert!(self.edges[key].is_none(), "key {key} already present");
        if e.a != e.b {
            let slot = self.agg.entry(pair(e.a, e.b)).or_insert((0, 0.0));
            slot.0 += 1;
            slot.1 += e.w;
        }
        self.edges[key] = Some(e);
        self.len += 1;
    }

    pub fn remove(&mut self, key: usize) -> Option<HEdge> {
        let e = self.edges.get_mut(key).and_then(Option::take)?;
        if e.a != e.b {
            let k = pair(e.a, e.b);
            let slot = self.agg.get_mut(&k).expect("aggregate present");
            slot.0 -= 1;
            slot.1 -= e.w;
            if slot.0 == 0 {
                self.agg.remove(&k);
            }
        }
        self.len -= 1;
        Some(e)
    }

    /// Stored edges in key order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &HEdge)> + '_ {
        self.edges.iter().enumerate().filter_map(|(k, e)| e.as_ref().map(|e| (k, e)))
    }

    /// Merged weight per unordered vertex pair, in pair order.
    pub fn aggregated(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.agg.iter().map(|(&(a, b), &(_, w))| (a, b, w))
    }

    pub fn num_pairs(&self) -> usize {
        self.agg.len()
    }

    /// Laplacian on the vertices of `order`, whose positions give row indices.
    /// Edges touching vertices outside `order` are ignored.
    pub fn laplacian_on(&self, order: &[usize]) -> DMatrix<f64> {
        let mut index = BTreeMap::new();
        for (i, &v) in order.iter().enumerate() {
            index.insert(v, i);
        }
        laplacian_from_edges(
            order.len(),
            self.aggregated().filter_map(|(a, b, w)| Some((*index.get(&a)?, *index.get(&b)?, w))),
        )
    }

    /// Sorted `(min, max, weight bits)` list for exact multiset comparison.
    pub fn canonical(&self) -> Vec<(usize, usize, u64)> {
        let mut v: Vec<_> = self.iter().map(|(_, e)| (e.a.min(e.b), e.a.max(e.b), e.w.to_bits())).collect();
        v.sort_unstable();
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SparsifyConfig {
    pub epsilon: f64,
    /// Oversampling constant `c` in `c * ln n / eps^2`.
    pub c_sample: f64,
}

impl SparsifyConfig {
    pub fn new(epsilon: f64) -> Self {
        SparsifyConfig { epsilon, c_sample: 8.0 }
    }

    fn factor(&self, n: usize) -> f64 {
        self.c_sample * (n.max(2) as f64).ln() / (self.epsilon * self.epsilon)
    }

    /// Number of edges below which sampling is skipped.
    pub fn target_edges(&self, n: usize) -> usize {
        (self.factor(n) * n.saturating_sub(1) as f64).ceil() as usize
    }
}

/// Resamples `source` into a new bag: each key is kept independently with
/// probability `min(1, c ln n w R / eps^2)` and reweighted by its inverse.
pub fn resample(source: &EdgeBag, vertices: &[usize], n: usize, cfg: &SparsifyConfig, seed: u64, round: u64) -> EdgeBag {
    let l = source.laplacian_on(vertices);
    let lp = pinv(&l);
    let comp = matrix_components(&l);
    let mut index = BTreeMap::new();
    for (i, &v) in vertices.iter().enumerate() {
        index.insert(v, i);
    }
    let factor = cfg.factor(n);
    let mut rng = stream(seed, Domain::Sparsify, &[round]);
    let mut out = EdgeBag::new();
    for (key, e) in source.iter() {
        let (Some(&i), Some(&j)) = (index.get(&e.a), index.get(&e.b)) else { continue };
        if i == j {
            continue;
        }
        let r = if comp[i] == comp[j] { (lp[(i, i)] + lp[(j, j)] - 2.0 * lp[(i, j)]).max(0.0) } else { 0.0 };
        let p = (factor * e.w * r).min(1.0);
        let coin: f64 = rng.random();
        if p >= 1.0 {
            out.insert(key, *e);
        } else if coin < p {
            out.insert(key, HEdge { w: e.w / p, ..*e });
        }
    }
    out
}

/// One-shot sparsifier of `g`. Returned unchanged when it is already small.
pub fn static_sparsify(g: &MultiGraph, cfg: &SparsifyConfig, seed: u64) -> MultiGraph {
    if g.num_edges() <= cfg.target_edges(g.n()) {
        return g.clone();
    }
    let mut bag = EdgeBag::new();
    for (id, e) in g.edges() {
        bag.insert(id.0, HEdge { a: e.u, b: e.v, w: e.w });
    }
    let all: Vec<usize> = (0..g.n()).collect();
    let sampled = resample(&bag, &all, g.n(), cfg, seed, 0);
    let mut out = MultiGraph::new(g.n(), WeightMode::Real);
    for (_, e) in sampled.iter() {
        out.insert_edge(e.a, e.b, e.w).expect("valid sampled edge");
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SparsifierMode {
    /// Report `H` itself.
    Identity,
    /// Resample after every `rebuild_every` changes.
    Periodic { rebuild_every: usize, epsilon: f64 },
}

/// Maintained `H` together with the view reported to queries.
#[derive(Clone, Debug)]
pub struct ApproxSchur {
    exact: EdgeBag,
    view: Option<PeriodicView>,
    /// Bumped on every change to either bag.
    version: u64,
}

#[derive(Clone, Debug)]
struct PeriodicView {
    bag: EdgeBag,
    rebuild_every: usize,
    cfg: SparsifyConfig,
    pending: usize,
    round: u64,
    seed: u64,
    n: usize,
}

impl ApproxSchur {
    pub fn new(mode: SparsifierMode, n: usize, seed: u64) -> Self {
        let view = match mode {
            SparsifierMode::Identity => None,
            SparsifierMode::Periodic { rebuild_every, epsilon } => Some(PeriodicView {
                bag: EdgeBag::new(),
                rebuild_every: rebuild_every.max(1),
                cfg: SparsifyConfig::new(epsilon),
                pending: 0,
                round: 0,
                seed,
                n,
            }),
        };
        ApproxSchur { exact: EdgeBag::new(), view, version: 0 }
    }

    /// Applies one change. `vertices` is the current terminal list, used when resampling.
    pub fn apply(&mut self, key: usize, old: Option<HEdge>, new: Option<HEdge>, vertices: &[usize]) {
        self.version += 1;
        if old.is_some() {
            self.exact.remove(key);
        }
        if let Some(e) = new {
            self.exact.insert(key, e);
        }
        if let Some(v) = &mut self.view {
            v.bag.remove(key);
            if let Some(e) = new {
                v.bag.insert(key, e);
            }
            v.pending += 1;
            if v.pending >= v.rebuild_every {
                v.round += 1;
                v.bag = resample(&self.exact, vertices, v.n, &v.cfg, v.seed, v.round);
                v.pending = 0;
            }
        }
    }

    /// Forces a resample of the periodic view; a no-op for the identity backend.
    pub fn refresh(&mut self, vertices: &[usize]) {
        self.version += 1;
        if let Some(v) = &mut self.view {
            v.round += 1;
            v.bag = resample(&self.exact, vertices, v.n, &v.cfg, v.seed, v.round);
            v.pending = 0;
        }
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    /// `H` exactly as maintained by the walks.
    pub fn exact(&self) -> &EdgeBag {
        &self.exact
    }

    /// What queries see.
    pub fn current(&self) -> &EdgeBag {
        match &self.view {
            None => &self.exact,
            Some(v) => &v.bag,
        }
    }
}
