//! Maintained projection of a demand vector onto a growing terminal set.
//!
//! `Proj_S b` is the demand obtained by letting every unit of `b` at a
//! non-terminal walk until it reaches `S`. It is computed once by contracting
//! `S`, solving, and reading off `b - L v`; afterwards promotions leave the
//! estimate unchanged, which costs an error proportional to the load of the
//! promoted vertex, and demand changes at terminals are added directly.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::MultiGraph;
use crate::oracle::{solve_lap, LaplacianOp, SparseLaplacian};
use crate::walk::TerminalSet;

/// The `k` vertices of largest `|b|`, ties broken by index.
pub fn top_demand_vertices(b: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..b.len()).collect();
    idx.sort_by(|&x, &y| b[y].abs().total_cmp(&b[x].abs()).then(x.cmp(&y)));
    idx.truncate(k);
    idx.retain(|&v| b[v] != 0.0);
    idx
}

/// `max(1, ceil(beta^3 * sqrt(m) * eps / ln^3 n))`.
pub fn ops_budget(beta: f64, epsilon: f64, m: usize, n: usize) -> usize {
    let ln = (n.max(2) as f64).ln();
    ((beta.powi(3) * (m as f64).sqrt() * epsilon / ln.powi(3)).ceil() as usize).max(1)
}

#[derive(Clone, Debug)]
pub struct ProjectionState {
    /// Current demand, in caller units.
    b: Vec<f64>,
    /// Internal estimate in scaled units, zero off the terminals.
    b_tilde: Vec<f64>,
    scale: f64,
    terminals: TerminalSet,
    degree: Vec<usize>,
    max_degree: usize,
    ops_used: usize,
    ops_budget: usize,
}

impl ProjectionState {
    /// `terminals` is the full set `S`; `epsilon` is the target accuracy.
    pub fn initialize(
        g: &MultiGraph,
        b: &[f64],
        terminals: &[usize],
        epsilon: f64,
        beta: f64,
        max_degree: usize,
    ) -> Result<Self> {
        let n = g.n();
        if b.len() != n {
            return Err(Error::InvalidParameter(format!("demand has {} entries, graph has {n} vertices", b.len())));
        }
        if let Some(v) = (0..n).find(|&v| g.degree(v) > max_degree) {
            return Err(Error::DegreeBound { vertex: v, bound: max_degree });
        }
        let set = TerminalSet::from_slice(n, terminals);
        let threshold = terminals.iter().map(|&t| b[t].abs()).filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min);
        let scale = if threshold.is_finite() { 1.0 / threshold } else { 1.0 };
        let bs: Vec<f64> = b.iter().map(|&x| x * scale).collect();

        // Contract S to the last index.
        let free: Vec<usize> = (0..n).filter(|&v| !set.contains(v)).collect();
        let mut gamma = vec![free.len(); n];
        for (i, &v) in free.iter().enumerate() {
            gamma[v] = i;
        }
        let k = free.len() + 1;
        let contracted = SparseLaplacian::from_edges(k, g.edges().map(|(_, e)| (gamma[e.u], gamma[e.v], e.w)));
        let mut rhs = vec![0.0; k];
        for v in 0..n {
            rhs[gamma[v]] += bs[v];
        }
        let vc = solve_lap(&contracted, &rhs, epsilon / 2.0)?;
        let lifted: Vec<f64> = (0..n).map(|v| vc[gamma[v]]).collect();
        let full = SparseLaplacian::from_graph(g);
        let mut lv = vec![0.0; n];
        full.apply(&lifted, &mut lv);
        let b_tilde = (0..n).map(|v| if set.contains(v) { bs[v] - lv[v] } else { 0.0 }).collect();
        Ok(ProjectionState {
            b: b.to_vec(),
            b_tilde,
            scale,
            terminals: set,
            degree: (0..n).map(|v| g.degree(v)).collect(),
            max_degree,
            ops_used: 0,
            ops_budget: ops_budget(beta, epsilon, g.num_edges(), n),
        })
    }

    pub fn terminals(&self) -> &TerminalSet {
        &self.terminals
    }

    pub fn demand(&self) -> &[f64] {
        &self.b
    }

    pub fn budget(&self) -> usize {
        self.ops_budget
    }

    pub fn ops_remaining(&self) -> usize {
        self.ops_budget.saturating_sub(self.ops_used)
    }

    fn charge(&mut self) -> Result<()> {
        if self.ops_used >= self.ops_budget {
            return Err(Error::NeedsRebuild(self.ops_budget));
        }
        self.ops_used += 1;
        Ok(())
    }

    fn check(&self, u: usize) -> Result<()> {
        let n = self.b.len();
        if u >= n {
            return Err(Error::VertexOutOfRange { vertex: u, n });
        }
        Ok(())
    }

    /// Adds `u` to `S`; its estimate starts at zero.
    pub fn add_terminal(&mut self, u: usize) -> Result<()> {
        self.check(u)?;
        self.charge()?;
        self.terminals.insert(u);
        Ok(())
    }

    /// Sets `b(u) = bu` and `b(v) = bv`; the total must not change.
    pub fn change(&mut self, u: usize, bu: f64, v: usize, bv: f64) -> Result<()> {
        self.check(u)?;
        self.check(v)?;
        let before = self.b[u] + if u == v { 0.0 } else { self.b[v] };
        let after = bu + if u == v { 0.0 } else { bv };
        let tol = 1e-9 * before.abs().max(after.abs()).max(1.0);
        if (before - after).abs() > tol || (u == v && bu != bv) {
            return Err(Error::RangeViolation(u, v));
        }
        self.charge()?;
        for (x, val) in [(u, bu), (v, bv)] {
            self.terminals.insert(x);
            let delta = val - self.b[x];
            self.b_tilde[x] += delta * self.scale;
            self.b[x] = val;
            if u == v {
                break;
            }
        }
        Ok(())
    }

    pub fn insert(&mut self, u: usize, v: usize) -> Result<()> {
        self.check(u)?;
        self.check(v)?;
        for x in [u, v] {
            if self.degree[x] + 1 > self.max_degree {
                return Err(Error::DegreeBound { vertex: x, bound: self.max_degree });
            }
        }
        self.charge()?;
        self.terminals.insert(u);
        self.terminals.insert(v);
        self.degree[u] += 1;
        self.degree[v] += 1;
        Ok(())
    }

    pub fn delete(&mut self, u: usize, v: usize) -> Result<()> {
        self.check(u)?;
        self.check(v)?;
        self.charge()?;
        self.terminals.insert(u);
        self.terminals.insert(v);
        self.degree[u] = self.degree[u].saturating_sub(1);
        self.degree[v] = self.degree[v].saturating_sub(1);
        Ok(())
    }

    /// `b~` as an `n`-vector supported on `S`, in caller units.
    pub fn query(&self) -> Vec<f64> {
        self.b_tilde.iter().map(|&x| x / self.scale).collect()
    }
}

/// Expected signed number of units of `b` whose walks visit `u` before `S`.
/// A unit starting at `u` counts as visiting it.
pub fn expected_load(g: &MultiGraph, terminals: &[usize], u: usize, b: &[f64]) -> Result<f64> {
    let n = g.n();
    let set = TerminalSet::from_slice(n, terminals);
    if set.contains(u) {
        return Err(Error::InvalidParameter(format!("vertex {u} is already a terminal")));
    }
    let comps = g.components();
    let cu = comps.of_vertex[u];
    // Only u's component can reach u.
    let free: Vec<usize> = (0..n).filter(|&x| x != u && comps.of_vertex[x] == cu && !set.contains(x)).collect();
    let mut index = vec![usize::MAX; n];
    for (i, &x) in free.iter().enumerate() {
        index[x] = i;
    }
    let k = free.len();
    let mut a = DMatrix::<f64>::identity(k, k);
    let mut rhs = nalgebra::DVector::<f64>::zeros(k);
    for (i, &x) in free.iter().enumerate() {
        let d = g.weighted_degree(x);
        for &(y, e) in g.neighbors(x) {
            let p = g.edge(e).expect("live").w / d;
            if y == u {
                rhs[i] += p;
            } else if index[y] != usize::MAX {
                a[(i, index[y])] -= p;
            }
        }
    }
    let h = if k > 0 { a.lu().solve(&rhs).ok_or(Error::SingularBlock)? } else { rhs };
    Ok(b[u] + free.iter().enumerate().map(|(i, &x)| b[x] * h[i]).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightMode;
    use crate::oracle::{exact_projection, laplacian, pinv};
    use crate::rng::{stream, Domain};
    use nalgebra::DVector;
    use rand::Rng as _;

    fn bounded(n: usize, deg: usize, seed: u64) -> MultiGraph {
        let mut rng = stream(seed, Domain::Test, &[n as u64]);
        let mut g = MultiGraph::unweighted(n);
        for i in 0..n - 1 {
            g.insert_edge(i, i + 1, 1.0).unwrap();
        }
        for _ in 0..n {
            let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
            if u != v && g.degree(u) < deg && g.degree(v) < deg {
                g.insert_edge(u, v, 1.0).unwrap();
            }
        }
        g
    }

    fn demand(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream(seed, Domain::Test, &[1]);
        let mut b: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let mean = b.iter().sum::<f64>() / n as f64;
        b.iter_mut().for_each(|x| *x -= mean);
        b
    }

    fn projected(g: &MultiGraph, s: &[usize], b: &[f64]) -> Vec<f64> {
        let p = exact_projection(&laplacian(g), s).unwrap();
        let pb = &p * DVector::from_column_slice(b);
        let mut out = vec![0.0; g.n()];
        for (i, &t) in s.iter().enumerate() {
            out[t] = pb[i];
        }
        out
    }

    fn sc_norm(g: &MultiGraph, s: &[usize], x: &[f64]) -> f64 {
        let sc = crate::oracle::exact_schur(&laplacian(g), s).unwrap().matrix;
        let v = DVector::from_iterator(s.len(), s.iter().map(|&t| x[t]));
        v.dot(&(pinv(&sc) * &v)).sqrt()
    }

    #[test]
    fn degree_identity_holds_at_every_step() {
        for seed in 0..50u64 {
            let mut g = bounded(12 + (seed as usize % 7), 5, 200 + seed);
            if seed % 2 == 1 {
                let mut rng = stream(seed, Domain::Test, &[7]);
                let mut w = MultiGraph::new(g.n(), WeightMode::weighted());
                for (_, e) in g.edges() {
                    w.insert_edge(e.u, e.v, [1.0, 10.0, 100.0][rng.random_range(0..3)]).unwrap();
                }
                g = w;
            }
            let u = seed as usize % g.n();
            for t in 0..=16 {
                let lhs = crate::oracle::position_degree_sum(&g, u, t);
                assert!((lhs - g.weighted_degree(u)).abs() < 1e-8 * g.weighted_degree(u).max(1.0), "seed {seed} t {t}");
            }
        }
    }

    #[test]
    fn load_next_to_terminals_on_a_path() {
        // Path 0-1-2-3 with S = {0, 3}: from 2 the walk reaches 1 before S w.p. 1/2.
        let g = MultiGraph::from_edges(4, WeightMode::Unweighted, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let load = expected_load(&g, &[0, 3], 1, &[-1.0, 1.0, 1.0, -1.0]).unwrap();
        assert!((load - 1.5).abs() < 1e-12);
    }

    #[test]
    fn top_demand_breaks_ties_by_index() {
        assert_eq!(top_demand_vertices(&[1.0, -3.0, 3.0, 0.0, 0.5], 3), vec![1, 2, 0]);
        assert_eq!(top_demand_vertices(&[0.0, 0.0], 2), Vec::<usize>::new());
    }

    #[test]
    fn budget_formula() {
        assert_eq!(ops_budget(0.3, 0.5, 100, 60), 1);
        let ln = 1000f64.ln();
        assert_eq!(ops_budget(1.0, 1.0, 1_000_000, 1000), (1000.0 / ln.powi(3)).ceil() as usize);
    }

    #[test]
    fn initialization_matches_exact_projection() {
        for seed in 0..10 {
            let g = bounded(40, 5, seed);
            let b = demand(40, seed);
            let s: Vec<usize> = (0..40).filter(|v| v % 4 == 1).collect();
            let st = ProjectionState::initialize(&g, &b, &s, 0.1, 0.3, 5).unwrap();
            let est = st.query();
            let exact = projected(&g, &s, &b);
            let err: Vec<f64> = (0..40).map(|v| est[v] - exact[v]).collect();
            assert!(sc_norm(&g, &s, &err) <= 0.1 * sc_norm(&g, &s, &exact), "seed {seed}");
            assert!((0..40).all(|v| s.contains(&v) || est[v] == 0.0));
        }
    }

    #[test]
    fn promotion_error_is_the_expected_load() {
        for seed in 0..10 {
            let g = bounded(11, 4, 50 + seed);
            let b = demand(11, 50 + seed);
            let s = vec![0, 5, 10];
            let u = 3;
            let before = projected(&g, &s, &b);
            let mut s2 = s.clone();
            s2.push(u);
            let after = projected(&g, &s2, &b);
            let load = expected_load(&g, &s, u, &b).unwrap();
            let mut ind = vec![0.0; 11];
            ind[u] = 1.0;
            let pu = projected(&g, &s, &ind);
            for v in 0..11 {
                let expected = -load * (ind[v] - pu[v]);
                assert!((before[v] - after[v] - expected).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn changes_move_terminal_demand_directly() {
        let g = bounded(30, 5, 3);
        let b = demand(30, 3);
        let s: Vec<usize> = (0..30).step_by(3).collect();
        let mut st = ProjectionState::initialize(&g, &b, &s, 0.05, 1.0, 5).unwrap();
        let before = st.query();
        let (u, v) = (4, 7);
        st.change(u, b[u] + 0.25, v, b[v] - 0.25).unwrap();
        let after = st.query();
        assert!((after[u] - before[u] - 0.25).abs() < 1e-12);
        assert!((after[v] - before[v] + 0.25).abs() < 1e-12);
        assert!(st.terminals().contains(u));
    }

    #[test]
    fn range_violations_and_degree_bound_are_rejected() {
        let g = bounded(20, 3, 4);
        let b = demand(20, 4);
        let mut st = ProjectionState::initialize(&g, &b, &[0, 1], 0.1, 1.0, 3).unwrap();
        assert!(matches!(st.change(2, b[2] + 1.0, 3, b[3]), Err(Error::RangeViolation(2, 3))));
        let full = (0..20).find(|&v| g.degree(v) == 3).unwrap();
        let other = (0..20).find(|&v| v != full).unwrap();
        assert!(matches!(st.insert(full, other), Err(Error::DegreeBound { .. })));
    }

    #[test]
    fn demand_outside_range_is_rejected() {
        let g = bounded(10, 4, 5);
        let b = vec![1.0; 10];
        assert!(matches!(ProjectionState::initialize(&g, &b, &[0], 0.1, 0.3, 4), Err(Error::NotInRange(_))));
    }

    #[test]
    fn weighted_graph_is_supported() {
        let mut g = MultiGraph::new(6, WeightMode::weighted());
        for (u, v, w) in [(0, 1, 2.0), (1, 2, 5.0), (2, 3, 1.0), (3, 4, 3.0), (4, 5, 1.0), (5, 0, 4.0)] {
            g.insert_edge(u, v, w).unwrap();
        }
        let b = demand(6, 9);
        let st = ProjectionState::initialize(&g, &b, &[0, 3], 0.01, 1.0, 4).unwrap();
        let exact = projected(&g, &[0, 3], &b);
        assert!((st.query()[0] - exact[0]).abs() < 1e-3);
    }
}
