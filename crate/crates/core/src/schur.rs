//! Dynamic approximate Schur complement maintained by truncated walks.
//!
//! For every edge and each of `rho` copies, a walk from each endpoint runs
//! until it meets the terminal set `T`. Joined through the edge, the pair
//! becomes an edge of `H` between the two terminals it found. Making `u` a
//! terminal cuts every walk at its first visit of `u`; an edge update first
//! makes both endpoints terminals, after which no walk passes through the
//! edge except its own trivial copies.
//!
//! `T` starts as the required set plus both endpoints of each edge with
//! probability `beta`, which keeps walks short. After `ceil(beta * m)`
//! operations the structure refuses further work and must be rebuilt.

use crate::error::{Error, Result};
use crate::graph::{Components, EdgeId, MultiGraph};
use crate::rng::{stream, Domain};
use crate::sparsify::{ApproxSchur, EdgeBag, SparsifierMode};
use crate::walk::{generate_walk, HDelta, Marks, TerminalSet, Walk, WalkCaps, WalkParams, WalkStore};
use crate::weighted::{cover_bound, generate_weighted_walk, WeightedWalkParams};
use rand::Rng as _;

#[derive(Clone, Debug, PartialEq)]
pub struct SchurConfig {
    pub beta: f64,
    pub epsilon: f64,
    /// `rho = ceil(c_rho * ln n / epsilon^2)`.
    pub c_rho: f64,
    pub walk: WalkParams,
    /// Relative accuracy of sampled resistances on weighted graphs.
    pub weight_epsilon: f64,
    pub sparsifier: SparsifierMode,
    pub seed: u64,
    /// When false, `T` is exactly the required set.
    pub sample_terminals: bool,
}

impl SchurConfig {
    pub fn new(beta: f64, epsilon: f64, seed: u64) -> Self {
        SchurConfig {
            beta,
            epsilon,
            c_rho: 32.0,
            walk: WalkParams::default(),
            weight_epsilon: epsilon,
            sparsifier: SparsifierMode::Identity,
            seed,
            sample_terminals: true,
        }
    }

    pub fn rho(&self, n: usize) -> usize {
        rho_for(n, self.epsilon, self.c_rho)
    }

    fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::InvalidParameter(format!("beta = {} must lie in (0, 1]", self.beta)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon = {} must lie in (0, 1)", self.epsilon)));
        }
        if !(self.c_rho > 0.0) || !(self.weight_epsilon > 0.0 && self.weight_epsilon < 1.0) {
            return Err(Error::InvalidParameter("c_rho and weight_epsilon must be positive".into()));
        }
        Ok(())
    }
}

pub fn rho_for(n: usize, epsilon: f64, c_rho: f64) -> usize {
    (c_rho * (n.max(2) as f64).ln() / (epsilon * epsilon)).ceil().max(1.0) as usize
}

/// Both endpoints of each edge, with probability `beta` per edge.
pub fn sample_endpoint_terminals(g: &MultiGraph, beta: f64, seed: u64, epoch: u64) -> Vec<usize> {
    let mut rng = stream(seed, Domain::TerminalSample, &[epoch]);
    let mut out = Vec::new();
    for (_, e) in g.edges() {
        if rng.random::<f64>() < beta {
            out.push(e.u);
            out.push(e.v);
        }
    }
    out
}

/// Work counters for the cost claims.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SchurStats {
    pub samples: usize,
    /// Stored walk positions after initialization.
    pub init_steps: u64,
    pub shortened_steps: u64,
    pub ops_since_build: usize,
    pub budget: usize,
}

#[derive(Clone, Debug)]
pub struct DynamicSC {
    cfg: SchurConfig,
    epoch: u64,
    graph: MultiGraph,
    terminals: TerminalSet,
    rho: usize,
    store: WalkStore,
    h: ApproxSchur,
    ops_since_build: usize,
    budget: usize,
    init_steps: u64,
}

impl DynamicSC {
    pub fn initialize(g: MultiGraph, required: &[usize], cfg: SchurConfig) -> Result<Self> {
        Self::initialize_epoch(g, required, cfg, 0)
    }

    /// `epoch` selects independent randomness for successive rebuilds.
    pub fn initialize_epoch(mut g: MultiGraph, required: &[usize], cfg: SchurConfig, epoch: u64) -> Result<Self> {
        cfg.validate()?;
        let n = g.n();
        for &t in required {
            if t >= n {
                return Err(Error::VertexOutOfRange { vertex: t, n });
            }
        }
        let mut terminals = TerminalSet::from_slice(n, required);
        if cfg.sample_terminals {
            for t in sample_endpoint_terminals(&g, cfg.beta, cfg.seed, epoch) {
                terminals.insert(t);
            }
        }
        let rho = cfg.rho(n);
        let caps = cfg.walk.caps(cfg.beta, n);
        let comps = g.components();
        let mut store = WalkStore::new(n);
        let mut h = ApproxSchur::new(cfg.sparsifier, n, cfg.seed ^ epoch.rotate_left(32));
        let weighted = g.is_weighted().then(|| WeightedWalkParams {
            event_cap: caps.distinct,
            cover_bound: cover_bound(&g),
            epsilon: cfg.weight_epsilon,
        });
        let edges: Vec<(EdgeId, usize, usize, f64)> = g.edges().map(|(id, e)| (id, e.u, e.v, e.w)).collect();
        let mut marks = Marks::default();
        let mut init_steps = 0u64;
        let sorted_terminals = terminals.sorted();
        for (id, u, v, w) in edges {
            for copy in 0..rho {
                let mut halves = [Walk::trivial(u), Walk::trivial(v)];
                for (side, &start) in [u, v].iter().enumerate() {
                    let mut rng = stream(cfg.seed, Domain::Walk, &[epoch, id.0 as u64, copy as u64, side as u64]);
                    halves[side] = match &weighted {
                        None => run_unweighted(&g, start, &terminals, caps, &comps, &mut rng, &mut marks),
                        Some(p) => {
                            let size = comps.vertex_count[comps.of_vertex[start]];
                            generate_weighted_walk(&mut g, start, &terminals, p, size, &mut rng)?
                        }
                    };
                    init_steps += halves[side].len() as u64;
                }
                let sid = store.add_sample(id, 1.0 / w, halves);
                if let Some(e) = store.h_edge(sid, rho) {
                    h.apply(sid as usize, None, Some(e), &sorted_terminals);
                }
            }
        }
        h.refresh(&sorted_terminals);
        let budget = ((cfg.beta * g.num_edges() as f64).ceil() as usize).max(1);
        Ok(DynamicSC { cfg, epoch, graph: g, terminals, rho, store, h, ops_since_build: 0, budget, init_steps })
    }

    pub fn config(&self) -> &SchurConfig {
        &self.cfg
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn graph(&self) -> &MultiGraph {
        &self.graph
    }

    pub fn terminals(&self) -> &TerminalSet {
        &self.terminals
    }

    pub fn rho(&self) -> usize {
        self.rho
    }

    pub fn store(&self) -> &WalkStore {
        &self.store
    }

    /// The sparsifier view of `H` on the current terminals.
    pub fn current_sparsifier(&self) -> &EdgeBag {
        self.h.current()
    }

    /// Changes whenever the reported view changes.
    pub fn h_version(&self) -> (u64, u64) {
        (self.epoch, self.h.version())
    }

    /// `H` exactly as maintained.
    pub fn h(&self) -> &EdgeBag {
        self.h.exact()
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn ops_remaining(&self) -> usize {
        self.budget.saturating_sub(self.ops_since_build)
    }

    pub fn needs_rebuild(&self) -> bool {
        self.ops_since_build >= self.budget
    }

    pub fn stats(&self) -> SchurStats {
        SchurStats {
            samples: self.store.num_samples(),
            init_steps: self.init_steps,
            shortened_steps: self.store.shortened_steps,
            ops_since_build: self.ops_since_build,
            budget: self.budget,
        }
    }

    fn charge(&mut self) -> Result<()> {
        if self.needs_rebuild() {
            return Err(Error::NeedsRebuild(self.budget));
        }
        self.ops_since_build += 1;
        Ok(())
    }

    fn apply(&mut self, deltas: &[HDelta]) {
        if deltas.is_empty() {
            return;
        }
        let ts = self.terminals.sorted();
        for d in deltas {
            self.h.apply(d.sample as usize, d.old, d.new, &ts);
        }
    }

    fn promote(&mut self, u: usize) -> Result<Vec<HDelta>> {
        if u >= self.graph.n() {
            return Err(Error::VertexOutOfRange { vertex: u, n: self.graph.n() });
        }
        if !self.terminals.insert(u) {
            return Ok(Vec::new());
        }
        let deltas = self.store.shorten_at(u, self.rho);
        self.apply(&deltas);
        Ok(deltas)
    }

    /// Makes `u` a terminal. Costs one operation even when `u` already is one.
    pub fn add_terminal(&mut self, u: usize) -> Result<Vec<HDelta>> {
        if u >= self.graph.n() {
            return Err(Error::VertexOutOfRange { vertex: u, n: self.graph.n() });
        }
        self.charge()?;
        self.promote(u)
    }

    pub fn insert(&mut self, u: usize, v: usize, w: f64) -> Result<EdgeId> {
        let n = self.graph.n();
        for x in [u, v] {
            if x >= n {
                return Err(Error::VertexOutOfRange { vertex: x, n });
            }
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        let (lo, hi) = self.graph.weight_bounds();
        if !(w >= lo && w <= hi) {
            return Err(Error::WeightOutOfRange { weight: w, min: lo, max: hi });
        }
        self.charge()?;
        self.promote(u)?;
        self.promote(v)?;
        let id = self.graph.insert_edge(u, v, w)?;
        let mut deltas = Vec::with_capacity(self.rho);
        for _ in 0..self.rho {
            let sid = self.store.add_sample(id, 1.0 / w, [Walk::trivial(u), Walk::trivial(v)]);
            deltas.push(HDelta { sample: sid, old: None, new: self.store.h_edge(sid, self.rho) });
        }
        self.apply(&deltas);
        Ok(id)
    }

    pub fn delete(&mut self, id: EdgeId) -> Result<()> {
        let e = self.graph.edge(id).ok_or(Error::UnknownEdge(id))?.clone();
        self.charge()?;
        self.promote(e.u)?;
        self.promote(e.v)?;
        let deltas = self.store.remove_samples_of(id, self.rho);
        self.apply(&deltas);
        debug_assert!(self.store.walks_on_edge(id).is_empty(), "a live walk still uses the deleted edge");
        self.graph.delete_edge(id)?;
        Ok(())
    }

    /// Deletes the live `u`-`v` edge with the smallest id.
    pub fn delete_between(&mut self, u: usize, v: usize) -> Result<EdgeId> {
        let id = self.graph.first_edge_between(u, v)?;
        self.delete(id)?;
        Ok(id)
    }

    /// Fresh structure on the current graph with the next epoch's randomness.
    pub fn rebuilt(&self, required: &[usize]) -> Result<Self> {
        Self::initialize_epoch(self.graph.clone(), required, self.cfg.clone(), self.epoch + 1)
    }

    /// Dense Laplacian of the current view in the order of `order`.
    pub fn sparsifier_laplacian(&self, order: &[usize]) -> nalgebra::DMatrix<f64> {
        self.h.current().laplacian_on(order)
    }
}

fn run_unweighted(
    g: &MultiGraph,
    start: usize,
    terminals: &TerminalSet,
    caps: WalkCaps,
    comps: &Components,
    rng: &mut crate::rng::Rng,
    marks: &mut Marks,
) -> Walk {
    let ce = comps.edge_count[comps.of_vertex[start]];
    generate_walk(g, start, terminals, caps, ce, rng, marks)
}

/// Static sampler: walks run until they meet `terminals` with no truncation,
/// giving an unbiased estimate of the Schur complement onto `terminals`.
pub fn sample_schur(g: &MultiGraph, terminals: &[usize], rho: usize, seed: u64) -> EdgeBag {
    let t = TerminalSet::from_slice(g.n(), terminals);
    let comps = g.components();
    let mut has_t = vec![false; comps.count()];
    for &x in terminals {
        has_t[comps.of_vertex[x]] = true;
    }
    let caps = WalkCaps { distinct: usize::MAX, steps: u64::MAX };
    let mut marks = Marks::default();
    let mut bag = EdgeBag::new();
    let mut key = 0;
    for (id, e) in g.edges() {
        if !has_t[comps.of_vertex[e.u]] {
            continue;
        }
        for copy in 0..rho {
            let mut ends = [0usize; 2];
            let mut cost = 1.0 / e.w;
            for (side, &start) in [e.u, e.v].iter().enumerate() {
                let mut rng = stream(seed, Domain::Walk, &[u64::MAX, id.0 as u64, copy as u64, side as u64]);
                let w = generate_walk(g, start, &t, caps, usize::MAX, &mut rng, &mut marks);
                ends[side] = w.vertices[w.vertices.len() - 1];
                cost += if g.is_weighted() {
                    w.edges.iter().map(|&x| 1.0 / g.edge(x).expect("live").w).sum::<f64>()
                } else {
                    w.len() as f64
                };
            }
            bag.insert(key, crate::walk::HEdge { a: ends[0], b: ends[1], w: 1.0 / (rho as f64 * cost) });
            key += 1;
        }
    }
    bag
}
