//! User-facing structures: dynamic effective resistance, a dynamic Laplacian
//! solver, and dynamic energy. Each owns its rebuild policy: when a layer
//! runs out of budget the whole structure is rebuilt on the current graph
//! with the next epoch's randomness, and the operation is retried.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, MultiGraph};
use crate::oracle::{laplacian, solve_lap, LaplacianOp, SparseLaplacian};
use crate::projection::{top_demand_vertices, ProjectionState};
use crate::schur::{DynamicSC, SchurConfig};
use crate::sparsify::{EdgeBag, SparsifierMode};
use crate::walk::WalkParams;

/// `m^(-1/4)` for unweighted graphs, `m^(-1/6)` for weighted ones.
pub fn er_beta(m: usize, weighted: bool) -> f64 {
    let m = m.max(1) as f64;
    if weighted { m.powf(-1.0 / 6.0) } else { m.powf(-0.25) }
}

/// `m^(-1/12)`.
pub fn solver_beta(m: usize) -> f64 {
    (m.max(1) as f64).powf(-1.0 / 12.0)
}

/// Laplacian of an edge bag on the vertices `order`, as a sparse operator.
struct LocalH {
    index: Vec<usize>,
    op: SparseLaplacian,
    comp: Vec<usize>,
}

impl LocalH {
    fn new(bag: &EdgeBag, n: usize, order: &[usize]) -> Self {
        let mut index = vec![usize::MAX; n];
        for (i, &t) in order.iter().enumerate() {
            index[t] = i;
        }
        let op = SparseLaplacian::from_edges(
            order.len(),
            bag.aggregated().filter(|&(a, b, _)| index[a] != usize::MAX && index[b] != usize::MAX).map(|(a, b, w)| (index[a], index[b], w)),
        );
        let comp = op.components();
        LocalH { index, op, comp }
    }

    /// Solves on `H` after removing each component's mean from `rhs`. Truncated
    /// walks can split a component of `G` in `H`, so `rhs` need not be in range.
    /// The result has zero mean on every component.
    fn solve(&self, rhs: &[f64], epsilon: f64) -> Result<DVector<f64>> {
        let centered = center(&self.comp, rhs);
        let x = solve_lap(&self.op, &centered, epsilon)?;
        Ok(DVector::from_vec(center(&self.comp, x.as_slice())))
    }
}

fn center(comp: &[usize], x: &[f64]) -> Vec<f64> {
    let k = comp.iter().copied().max().map_or(0, |c| c + 1);
    let mut sums = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for (i, &c) in comp.iter().enumerate() {
        sums[c] += x[i];
        counts[c] += 1;
    }
    x.iter().zip(comp).map(|(v, &c)| v - sums[c] / counts[c] as f64).collect()
}

/// Resistance operator on every vertex touched by `bag`, plus `extra`.
struct ErOperator {
    h: LocalH,
}

impl ErOperator {
    fn new(bag: &EdgeBag, n: usize, extra: &[usize]) -> Self {
        let mut seen = vec![false; n];
        let mut order = Vec::new();
        for v in extra.iter().copied().chain(bag.aggregated().flat_map(|(a, b, _)| [a, b])) {
            if !std::mem::replace(&mut seen[v], true) {
                order.push(v);
            }
        }
        ErOperator { h: LocalH::new(bag, n, &order) }
    }

    fn er(&self, s: usize, t: usize, epsilon: f64) -> Result<f64> {
        if s == t {
            return Ok(0.0);
        }
        let h = &self.h;
        let (i, j) = (h.index[s], h.index[t]);
        if i == usize::MAX || j == usize::MAX || h.comp[i] != h.comp[j] {
            return Err(Error::Disconnected(s, t));
        }
        let mut chi = vec![0.0; h.op.dim()];
        chi[i] = 1.0;
        chi[j] = -1.0;
        let x = solve_lap(&h.op, &chi, epsilon)?;
        Ok(x[i] - x[j])
    }
}

/// Effective resistance between `s` and `t` in the graph given by `bag`.
pub fn er_on_bag(bag: &EdgeBag, n: usize, s: usize, t: usize, epsilon: f64) -> Result<f64> {
    ErOperator::new(bag, n, &[s, t]).er(s, t, epsilon)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErConfig {
    pub schur: SchurConfig,
    pub solve_epsilon: f64,
}

impl ErConfig {
    /// Splits `epsilon` evenly between sampling, weight estimates, and the solve.
    pub fn new(beta: f64, epsilon: f64, seed: u64) -> Self {
        let mut schur = SchurConfig::new(beta, epsilon / 3.0, seed);
        schur.weight_epsilon = epsilon / 3.0;
        ErConfig { schur, solve_epsilon: epsilon / 3.0 }
    }
}

pub struct DynamicER {
    ds: DynamicSC,
    solve_epsilon: f64,
    rebuilds: usize,
    /// Operator for the `H` version it was built from.
    cache: Option<((u64, u64), ErOperator)>,
}

impl DynamicER {
    pub fn new(g: MultiGraph, cfg: ErConfig) -> Result<Self> {
        Self::with_epoch(g, cfg, 0)
    }

    pub fn with_epoch(g: MultiGraph, cfg: ErConfig, epoch: u64) -> Result<Self> {
        let ds = DynamicSC::initialize_epoch(g, &[], cfg.schur, epoch)?;
        Ok(DynamicER { ds, solve_epsilon: cfg.solve_epsilon, rebuilds: 0, cache: None })
    }

    pub fn schur(&self) -> &DynamicSC {
        &self.ds
    }

    pub fn graph(&self) -> &MultiGraph {
        self.ds.graph()
    }

    pub fn rebuilds(&self) -> usize {
        self.rebuilds
    }

    /// Rebuilds now; `required` become terminals at no cost.
    pub fn rebuild(&mut self, required: &[usize]) -> Result<()> {
        self.ds = self.ds.rebuilt(required)?;
        self.rebuilds += 1;
        Ok(())
    }

    fn reserve(&mut self, ops: usize, required: &[usize]) -> Result<()> {
        if self.ds.ops_remaining() < ops {
            self.rebuild(required)?;
        }
        Ok(())
    }

    pub fn insert(&mut self, u: usize, v: usize, w: f64) -> Result<EdgeId> {
        self.reserve(1, &[])?;
        self.ds.insert(u, v, w)
    }

    pub fn delete(&mut self, u: usize, v: usize) -> Result<EdgeId> {
        self.ds.graph().first_edge_between(u, v)?;
        self.reserve(1, &[])?;
        self.ds.delete_between(u, v)
    }

    pub fn add_terminal(&mut self, u: usize) -> Result<()> {
        self.reserve(1, &[u])?;
        if !self.ds.terminals().contains(u) {
            self.ds.add_terminal(u)?;
        }
        Ok(())
    }

    /// Promotes `s` and `t`, then solves on the current `H`.
    pub fn query(&mut self, s: usize, t: usize) -> Result<f64> {
        let n = self.ds.graph().n();
        for x in [s, t] {
            if x >= n {
                return Err(Error::VertexOutOfRange { vertex: x, n });
            }
        }
        let missing: Vec<usize> = [s, t].into_iter().filter(|&x| !self.ds.terminals().contains(x)).collect();
        let needed = if s == t { missing.len().min(1) } else { missing.len() };
        if self.ds.ops_remaining() < needed {
            self.rebuild(&[s, t])?;
        } else {
            for x in missing {
                if !self.ds.terminals().contains(x) {
                    self.ds.add_terminal(x)?;
                }
            }
        }
        let version = self.ds.h_version();
        if self.cache.as_ref().is_none_or(|c| c.0 != version) {
            self.cache = Some((version, ErOperator::new(self.ds.current_sparsifier(), n, &[])));
        }
        self.cache.as_ref().expect("just built").1.er(s, t, self.solve_epsilon)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub beta: f64,
    pub epsilon: f64,
    pub schur_epsilon: f64,
    pub proj_epsilon: f64,
    pub solve_epsilon: f64,
    pub c_rho: f64,
    pub walk: WalkParams,
    pub sparsifier: SparsifierMode,
    pub max_degree: usize,
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(beta: f64, epsilon: f64, max_degree: usize, seed: u64) -> Self {
        SolverConfig {
            beta,
            epsilon,
            schur_epsilon: epsilon / 2.0,
            proj_epsilon: epsilon / 4.0,
            solve_epsilon: epsilon / 4.0,
            c_rho: 32.0,
            walk: WalkParams::default(),
            sparsifier: SparsifierMode::Identity,
            max_degree,
            seed,
        }
    }

    fn schur(&self) -> SchurConfig {
        let mut s = SchurConfig::new(self.beta, self.schur_epsilon, self.seed);
        s.c_rho = self.c_rho;
        s.walk = self.walk;
        s.sparsifier = self.sparsifier;
        s
    }
}

/// Solver and energy structure. The walk layer and the projection share one
/// terminal set: every promotion is applied to both.
#[derive(Clone, Debug)]
pub struct DynamicSolver {
    cfg: SolverConfig,
    ds: DynamicSC,
    pj: ProjectionState,
    /// `E~(b) - E~(Proj b)` at the last build.
    energy_free: f64,
    epoch: u64,
    rebuilds: usize,
}

impl DynamicSolver {
    pub fn new(g: MultiGraph, b: &[f64], cfg: SolverConfig) -> Result<Self> {
        Self::with_epoch(g, b, cfg, 0, &[])
    }

    pub fn with_epoch(g: MultiGraph, b: &[f64], cfg: SolverConfig, epoch: u64, required: &[usize]) -> Result<Self> {
        if b.len() != g.n() {
            return Err(Error::InvalidParameter(format!("demand has {} entries, graph has {} vertices", b.len(), g.n())));
        }
        let k = (cfg.beta * g.num_edges() as f64).ceil() as usize;
        let mut s_prime = top_demand_vertices(b, k);
        s_prime.extend_from_slice(required);
        let energy_b = {
            let x = solve_lap(&SparseLaplacian::from_graph(&g), b, cfg.solve_epsilon)?;
            let mut lx = vec![0.0; g.n()];
            SparseLaplacian::from_graph(&g).apply(x.as_slice(), &mut lx);
            x.as_slice().iter().zip(&lx).map(|(a, c)| a * c).sum::<f64>()
        };
        let ds = DynamicSC::initialize_epoch(g, &s_prime, cfg.schur(), epoch)?;
        let terminals = ds.terminals().sorted();
        let pj = ProjectionState::initialize(ds.graph(), b, &terminals, cfg.proj_epsilon, cfg.beta, cfg.max_degree)?;
        let mut out = DynamicSolver { cfg, ds, pj, energy_free: 0.0, epoch, rebuilds: 0 };
        out.energy_free = energy_b - out.projected_energy()?;
        Ok(out)
    }

    pub fn graph(&self) -> &MultiGraph {
        self.ds.graph()
    }

    pub fn demand(&self) -> &[f64] {
        self.pj.demand()
    }

    pub fn schur(&self) -> &DynamicSC {
        &self.ds
    }

    pub fn projection(&self) -> &ProjectionState {
        &self.pj
    }

    pub fn rebuilds(&self) -> usize {
        self.rebuilds
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn rebuild(&mut self, required: &[usize]) -> Result<()> {
        let b = self.pj.demand().to_vec();
        let rebuilds = self.rebuilds + 1;
        *self = Self::with_epoch(self.ds.graph().clone(), &b, self.cfg.clone(), self.epoch + 1, required)?;
        self.rebuilds = rebuilds;
        Ok(())
    }

    fn reserve(&mut self, ds_ops: usize, pj_ops: usize, required: &[usize]) -> Result<bool> {
        if self.ds.ops_remaining() < ds_ops || self.pj.ops_remaining() < pj_ops {
            self.rebuild(required)?;
            return Ok(true);
        }
        Ok(false)
    }

    fn promote(&mut self, u: usize) -> Result<()> {
        if !self.ds.terminals().contains(u) {
            self.ds.add_terminal(u)?;
        }
        Ok(())
    }

    fn check_vertex(&self, u: usize) -> Result<()> {
        let n = self.ds.graph().n();
        if u >= n {
            return Err(Error::VertexOutOfRange { vertex: u, n });
        }
        Ok(())
    }

    pub fn insert(&mut self, u: usize, v: usize, w: f64) -> Result<EdgeId> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let g = self.ds.graph();
        for x in [u, v] {
            if g.degree(x) + 1 > self.cfg.max_degree {
                return Err(Error::DegreeBound { vertex: x, bound: self.cfg.max_degree });
            }
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        let (lo, hi) = g.weight_bounds();
        if !(w >= lo && w <= hi) {
            return Err(Error::WeightOutOfRange { weight: w, min: lo, max: hi });
        }
        self.reserve(1, 1, &[])?;
        self.pj.insert(u, v)?;
        self.ds.insert(u, v, w)
    }

    pub fn delete(&mut self, u: usize, v: usize) -> Result<EdgeId> {
        self.ds.graph().first_edge_between(u, v)?;
        self.reserve(1, 1, &[])?;
        self.pj.delete(u, v)?;
        self.ds.delete_between(u, v)
    }

    /// Sets `b(u) = bu` and `b(v) = bv`, keeping the total.
    pub fn change(&mut self, u: usize, bu: f64, v: usize, bv: f64) -> Result<()> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let b = self.pj.demand();
        let before = b[u] + if u == v { 0.0 } else { b[v] };
        let after = bu + if u == v { 0.0 } else { bv };
        if (before - after).abs() > 1e-9 * before.abs().max(after.abs()).max(1.0) || (u == v && bu != bv) {
            return Err(Error::RangeViolation(u, v));
        }
        let missing = [u, v].iter().filter(|&&x| !self.ds.terminals().contains(x)).count();
        self.reserve(missing, 1, &[])?;
        self.pj.change(u, bu, v, bv)?;
        self.promote(u)?;
        self.promote(v)
    }

    /// `x~_T` on the sorted terminal list: zero mean on each component of `H`.
    pub fn solve_terminals(&self) -> Result<(Vec<usize>, DVector<f64>)> {
        let order = self.ds.terminals().sorted();
        let h = LocalH::new(self.ds.current_sparsifier(), self.ds.graph().n(), &order);
        let bt = self.pj.query();
        let rhs: Vec<f64> = order.iter().map(|&t| bt[t]).collect();
        let x = h.solve(&rhs, self.cfg.solve_epsilon)?;
        Ok((order, x))
    }

    pub fn add_terminal(&mut self, u: usize) -> Result<()> {
        self.check_vertex(u)?;
        if !self.ds.terminals().contains(u) && !self.reserve(1, 1, &[u])? {
            self.pj.add_terminal(u)?;
            self.promote(u)?;
        }
        Ok(())
    }

    /// Promotes `u` and returns `x~(u)`.
    pub fn solve_at(&mut self, u: usize) -> Result<f64> {
        self.add_terminal(u)?;
        let (order, x) = self.solve_terminals()?;
        let i = order.binary_search(&u).expect("u is a terminal");
        Ok(x[i])
    }

    fn projected_energy(&self) -> Result<f64> {
        let order = self.ds.terminals().sorted();
        let h = LocalH::new(self.ds.current_sparsifier(), self.ds.graph().n(), &order);
        let bt = self.pj.query();
        let rhs: Vec<f64> = order.iter().map(|&t| bt[t]).collect();
        let x = h.solve(&rhs, self.cfg.solve_epsilon)?;
        let mut lx = vec![0.0; order.len()];
        h.op.apply(x.as_slice(), &mut lx);
        Ok(x.iter().zip(&lx).map(|(a, c)| a * c).sum())
    }

    /// `E~(Proj b)` on the current `H` plus the part frozen at the last build.
    pub fn energy(&self) -> Result<f64> {
        Ok(self.projected_energy()? + self.energy_free)
    }
}

/// Extends terminal potentials to all of `g` by harmonic extension:
/// `x_F = L_FF^-1 (b_F - L_FT x_T)`. Dense, for checking.
pub fn lift(g: &MultiGraph, b: &[f64], terminals: &[usize], x_t: &DVector<f64>) -> Result<DVector<f64>> {
    let n = g.n();
    let l = laplacian(g);
    let mut is_t = vec![usize::MAX; n];
    for (i, &t) in terminals.iter().enumerate() {
        is_t[t] = i;
    }
    let free: Vec<usize> = (0..n).filter(|&v| is_t[v] == usize::MAX).collect();
    let mut x = DVector::zeros(n);
    for (i, &t) in terminals.iter().enumerate() {
        x[t] = x_t[i];
    }
    if free.is_empty() {
        return Ok(x);
    }
    let k = free.len();
    let lff = DMatrix::from_fn(k, k, |i, j| l[(free[i], free[j])]);
    let rhs = DVector::from_fn(k, |i, _| {
        b[free[i]] - terminals.iter().enumerate().map(|(j, &t)| l[(free[i], t)] * x_t[j]).sum::<f64>()
    });
    let xf = lff.lu().solve(&rhs).ok_or(Error::SingularBlock)?;
    for (i, &v) in free.iter().enumerate() {
        x[v] = xf[i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightMode;
    use crate::oracle::{exact_energy, exact_er, exact_solve, l_norm_sq};
    use crate::rng::{stream, Domain};
    use rand::Rng as _;

    fn gnp(n: usize, p: f64, seed: u64) -> MultiGraph {
        let mut rng = stream(seed, Domain::Test, &[n as u64]);
        let mut g = MultiGraph::unweighted(n);
        for i in 0..n - 1 {
            g.insert_edge(i, i + 1, 1.0).unwrap();
        }
        for u in 0..n {
            for v in u + 2..n {
                if rng.random::<f64>() < p {
                    g.insert_edge(u, v, 1.0).unwrap();
                }
            }
        }
        g
    }

    fn bounded(n: usize, deg: usize, seed: u64) -> MultiGraph {
        let mut rng = stream(seed, Domain::Test, &[n as u64, 1]);
        let mut g = MultiGraph::unweighted(n);
        for i in 0..n - 1 {
            g.insert_edge(i, i + 1, 1.0).unwrap();
        }
        for _ in 0..2 * n {
            let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
            if u != v && g.degree(u) < deg && g.degree(v) < deg {
                g.insert_edge(u, v, 1.0).unwrap();
            }
        }
        g
    }

    fn demand(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream(seed, Domain::Test, &[2]);
        let mut b: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let mean = b.iter().sum::<f64>() / n as f64;
        b.iter_mut().for_each(|x| *x -= mean);
        b
    }

    #[test]
    fn single_edge_and_triangle() {
        let g = MultiGraph::from_edges(2, WeightMode::Unweighted, &[(0, 1, 1.0)]).unwrap();
        let mut d = DynamicER::new(g, ErConfig::new(0.5, 0.5, 1)).unwrap();
        assert!((d.query(0, 1).unwrap() - 1.0).abs() < 0.5);
        let g = MultiGraph::from_edges(3, WeightMode::Unweighted, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let mut d = DynamicER::new(g, ErConfig::new(0.5, 0.5, 2)).unwrap();
        for (s, t) in [(0, 1), (1, 2), (0, 2)] {
            let r = d.query(s, t).unwrap();
            assert!((r - 2.0 / 3.0).abs() <= 0.5 * 2.0 / 3.0, "{r}");
        }
        assert_eq!(d.query(1, 1).unwrap(), 0.0);
    }

    #[test]
    fn mixed_stream_tracks_exact_resistance() {
        let n = 30;
        let mut g = gnp(n, 0.25, 3);
        let mut d = DynamicER::new(g.clone(), ErConfig::new(0.3, 0.5, 3)).unwrap();
        let mut rng = stream(3, Domain::Test, &[9]);
        let (mut good, mut total) = (0, 0);
        for step in 0..150 {
            let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
            if u == v {
                continue;
            }
            match step % 3 {
                0 => {
                    g.insert_edge(u, v, 1.0).unwrap();
                    d.insert(u, v, 1.0).unwrap();
                }
                1 if g.first_edge_between(u, v).is_ok() && g.num_edges() > n => {
                    g.delete_edge(g.first_edge_between(u, v).unwrap()).unwrap();
                    d.delete(u, v).unwrap();
                }
                _ => {
                    let exact = exact_er(&laplacian(&g), u, v);
                    let got = d.query(u, v);
                    total += 1;
                    match (exact, got) {
                        (Ok(e), Ok(x)) if (x - e).abs() <= 0.5 * e => good += 1,
                        (Err(_), Err(Error::Disconnected(..))) => good += 1,
                        _ => {}
                    }
                }
            }
        }
        assert!(d.rebuilds() >= 1);
        assert!(good as f64 >= 0.9 * total as f64, "{good}/{total}");
    }

    #[test]
    fn disconnected_query_is_reported() {
        let g = MultiGraph::from_edges(4, WeightMode::Unweighted, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let mut d = DynamicER::new(g, ErConfig::new(0.5, 0.5, 4)).unwrap();
        assert!(matches!(d.query(0, 3), Err(Error::Disconnected(..))));
    }

    #[test]
    fn weighted_resistance() {
        let mut rng = stream(5, Domain::Test, &[]);
        let base = gnp(14, 0.3, 5);
        let mut g = MultiGraph::new(14, WeightMode::weighted());
        for (_, e) in base.edges() {
            g.insert_edge(e.u, e.v, [1.0, 10.0, 100.0][rng.random_range(0..3)]).unwrap();
        }
        let mut d = DynamicER::new(g.clone(), ErConfig::new(0.3, 0.5, 5)).unwrap();
        let l = laplacian(&g);
        let mut good = 0;
        for (s, t) in [(0, 13), (2, 9), (5, 6), (1, 12)] {
            let e = exact_er(&l, s, t).unwrap();
            if (d.query(s, t).unwrap() - e).abs() <= 0.5 * e {
                good += 1;
            }
        }
        assert!(good >= 3);
    }

    #[test]
    fn rebuild_matches_fresh_instance() {
        let g = gnp(20, 0.3, 6);
        let cfg = ErConfig::new(0.3, 0.5, 6);
        let mut d = DynamicER::new(g.clone(), cfg.clone()).unwrap();
        d.insert(0, 19, 1.0).unwrap();
        d.rebuild(&[]).unwrap();
        let mut g2 = g.clone();
        g2.insert_edge(0, 19, 1.0).unwrap();
        let mut fresh = DynamicER::with_epoch(g2, cfg, 1).unwrap();
        assert_eq!(d.query(3, 11).unwrap(), fresh.query(3, 11).unwrap());
    }

    #[test]
    fn solver_trivial_cases() {
        let g = MultiGraph::from_edges(2, WeightMode::Unweighted, &[(0, 1, 1.0)]).unwrap();
        let mut s = DynamicSolver::new(g.clone(), &[1.0, -1.0], SolverConfig::new(0.5, 0.25, 4, 1)).unwrap();
        let diff = s.solve_at(0).unwrap() - s.solve_at(1).unwrap();
        assert!((diff - 1.0).abs() <= 0.25);
        assert!((s.energy().unwrap() - 1.0).abs() <= 0.25);
        let mut z = DynamicSolver::new(g, &[0.0, 0.0], SolverConfig::new(0.5, 0.25, 4, 1)).unwrap();
        assert_eq!(z.solve_at(0).unwrap(), 0.0);
        assert_eq!(z.energy().unwrap(), 0.0);
    }

    #[test]
    fn lifted_solution_meets_the_norm_bound() {
        let mut passed = 0;
        for seed in 0..10 {
            let g = bounded(40, 6, 10 + seed);
            let b = demand(40, 10 + seed);
            let mut cfg = SolverConfig::new(0.3, 0.25, 6, seed);
            cfg.c_rho = 4.0;
            let mut s = DynamicSolver::new(g, &b, cfg).unwrap();
            s.insert(0, 39, 1.0).ok();
            s.change(3, b[3] + 0.1, 7, b[7] - 0.1).unwrap();
            s.solve_at(20).unwrap();
            let (order, xt) = s.solve_terminals().unwrap();
            let x = lift(s.graph(), s.demand(), &order, &xt).unwrap();
            let l = laplacian(s.graph());
            let exact = exact_solve(&l, s.demand()).unwrap();
            if l_norm_sq(&l, &(&x - &exact)).sqrt() <= 0.25 * l_norm_sq(&l, &exact).sqrt() {
                passed += 1;
            }
            let e = exact_energy(&l, s.demand()).unwrap();
            assert!((s.energy().unwrap() - e).abs() <= 0.25 * e, "seed {seed}");
        }
        assert!(passed >= 9, "{passed}/10");
    }

    #[test]
    fn degree_bound_and_range_are_enforced() {
        let g = bounded(20, 3, 7);
        let b = demand(20, 7);
        let mut s = DynamicSolver::new(g.clone(), &b, SolverConfig::new(0.3, 0.25, 3, 7)).unwrap();
        let full = (0..20).find(|&v| g.degree(v) == 3).unwrap();
        let other = (0..20).find(|&v| v != full && g.degree(v) < 3).unwrap();
        assert!(matches!(s.insert(full, other, 1.0), Err(Error::DegreeBound { .. })));
        assert!(matches!(s.change(1, b[1] + 1.0, 2, b[2]), Err(Error::RangeViolation(1, 2))));
    }

    #[test]
    fn beta_defaults() {
        assert!((er_beta(10_000, false) - 0.1).abs() < 1e-12);
        assert!((solver_beta(4096) - 0.5).abs() < 1e-12);
        assert!(er_beta(64, true) == 0.5);
    }
}
