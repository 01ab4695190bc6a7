//! Event-driven walks on weighted graphs.
//!
//! The walk is simulated only at the moments it first reaches a new vertex.
//! With `U` the visited set and `u` the current vertex, the exit time `X` is
//! drawn by binary search over the absorbing kernel `W`, the exit edge is drawn
//! from `W^(X-1) e_u` weighted by boundary weight, and the resistance of the
//! `X - 1` confined steps comes from the bucketed pmf machinery.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, MultiGraph};
use crate::pmf::{WalkKernel, WeightSampler, BucketGrid};
use crate::rng::Rng;
use crate::walk::{TerminalSet, Walk, WalkStatus};

const COVER_CONSTANT: u64 = 8;
const MAX_COVER_BOUND: u64 = 1 << 62;

/// `c * m^3 * ceil(w_max / w_min)`, an upper bound on the exit time from any
/// proper subset of a component.
///
/// The weight ratio is needed: a path alternating unit and very heavy edges
/// keeps a walk on a heavy edge for about `w_max` steps.
pub fn cover_bound(g: &MultiGraph) -> u64 {
    let m = g.num_edges().max(1) as f64;
    let (lo, hi) = g.min_max_weight();
    let ratio = (hi / lo).ceil().max(1.0);
    let b = COVER_CONSTANT as f64 * m * m * m * ratio;
    if b >= MAX_COVER_BOUND as f64 {
        MAX_COVER_BOUND
    } else {
        b as u64
    }
}

/// Absorbing kernel on `U` plus one absorbing state for "left `U`".
///
/// With `p_0 = e_start`, the vector `W^i p_0` holds in its first `k` entries
/// the probability of being at each vertex of `U` after `i` steps without
/// having left, and in the last entry the probability of having left.
#[derive(Clone, Debug)]
pub struct ExitKernel {
    visited: Vec<usize>,
    start: usize,
    w: DMatrix<f64>,
    boundary: Vec<f64>,
}

impl ExitKernel {
    pub fn new(g: &MultiGraph, visited: &[usize], start: usize) -> Result<Self> {
        let k = visited.len();
        let start = visited.iter().position(|&x| x == start).ok_or_else(|| {
            Error::InvalidParameter(format!("start vertex {start} is not in the visited set"))
        })?;
        let mut w = DMatrix::zeros(k + 1, k + 1);
        let mut boundary = vec![0.0; k];
        for (iu, &u) in visited.iter().enumerate() {
            let d = g.weighted_degree(u);
            if d <= 0.0 {
                return Err(Error::IsolatedVertex(u));
            }
            let mut inside = 0.0;
            for (iv, &v) in visited.iter().enumerate() {
                if iv == iu {
                    continue;
                }
                let wuv = g.pair_weight(u, v);
                if wuv > 0.0 {
                    w[(iv, iu)] = wuv / d;
                    inside += wuv;
                }
            }
            boundary[iu] = (d - inside).max(0.0);
            w[(k, iu)] = boundary[iu] / d;
        }
        w[(k, k)] = 1.0;
        if boundary.iter().all(|&b| b <= 0.0) {
            return Err(Error::NoBoundary);
        }
        Ok(ExitKernel { visited: visited.to_vec(), start, w, boundary })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn size(&self) -> usize {
        self.visited.len()
    }

    pub fn visited(&self) -> &[usize] {
        &self.visited
    }

    pub fn initial(&self) -> DVector<f64> {
        let mut p = DVector::zeros(self.size() + 1);
        p[self.start] = 1.0;
        p
    }

    /// `W^(2^b)` for `b` up to the bit length of `max_power`.
    pub fn powers(&self, max_power: u64) -> PowerCache {
        let bits = (64 - max_power.leading_zeros()).max(1) as usize;
        let mut squares = Vec::with_capacity(bits);
        squares.push(self.w.clone());
        for b in 1..bits {
            let s = &squares[b - 1] * &squares[b - 1];
            squares.push(s);
        }
        PowerCache { squares, p0: self.initial() }
    }
}

/// Squares of one kernel, valid for a single binary search.
pub struct PowerCache {
    squares: Vec<DMatrix<f64>>,
    p0: DVector<f64>,
}

impl PowerCache {
    /// `W^i p_0`.
    pub fn apply(&self, i: u64) -> DVector<f64> {
        let mut v = self.p0.clone();
        let mut rest = i;
        let mut b = 0;
        while rest > 0 {
            if rest & 1 == 1 {
                v = &self.squares[b] * v;
            }
            rest >>= 1;
            b += 1;
        }
        v
    }

    pub fn exit_probability(&self, i: u64) -> f64 {
        let v = self.apply(i);
        v[v.len() - 1]
    }
}

/// `W^i p_0` by repeated squaring.
pub fn matrix_power_apply(w: &DMatrix<f64>, p0: &DVector<f64>, i: u64) -> DVector<f64> {
    let mut v = p0.clone();
    let mut sq = w.clone();
    let mut rest = i;
    while rest > 0 {
        if rest & 1 == 1 {
            v = &sq * v;
        }
        rest >>= 1;
        if rest > 0 {
            sq = &sq * &sq;
        }
    }
    v
}

/// Draws the first time the walk leaves `U`, by binary search on `(0, M]`.
pub fn sample_exit_time(kernel: &ExitKernel, powers: &PowerCache, bound: u64, n: usize, rng: &mut Rng) -> Result<u64> {
    let top = powers.exit_probability(bound);
    let slack = 1.0 / (n.max(2) as f64).powi(2);
    if top < 1.0 - slack {
        return Err(Error::CoverBound { bound, probability: top });
    }
    debug_assert_eq!(powers.p0.len(), kernel.size() + 1);
    let (mut l, mut r) = (0u64, bound);
    let (mut lp, mut rp) = (0.0f64, top);
    while r - l > 1 {
        let mid = l + (r - l) / 2;
        let pm = powers.exit_probability(mid);
        let denom = rp - lp;
        let go_left = if denom < 1e-15 { 0.5 } else { ((pm - lp) / denom).clamp(0.0, 1.0) };
        if rng.random::<f64>() < go_left {
            r = mid;
            rp = pm;
        } else {
            l = mid;
            lp = pm;
        }
    }
    Ok(r)
}

/// The edge by which the walk leaves `U` at time `x`: `(inside vertex, outside vertex, edge)`.
pub fn sample_exit_edge(
    g: &mut MultiGraph,
    kernel: &ExitKernel,
    powers: &PowerCache,
    x: u64,
    rng: &mut Rng,
) -> Result<(usize, usize, EdgeId)> {
    let q = powers.apply(x - 1);
    let k = kernel.size();
    let scores: Vec<f64> = (0..k).map(|i| q[i].max(0.0) * kernel.boundary[i]).collect();
    let total: f64 = scores.iter().sum();
    if !(total > 0.0) {
        return Err(Error::NoBoundary);
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut pick = None;
    for (i, &s) in scores.iter().enumerate() {
        if s <= 0.0 {
            continue;
        }
        pick = Some(i);
        acc += s;
        if target < acc {
            break;
        }
    }
    let from = kernel.visited[pick.expect("positive total")];
    let (to, e) = g.random_incident_excluding(from, &kernel.visited, rng).ok_or(Error::NoBoundary)?;
    Ok((from, to, e))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedWalkParams {
    /// Maximum number of first-visit events.
    pub event_cap: usize,
    pub cover_bound: u64,
    /// Relative accuracy of each sampled sub-walk resistance.
    pub epsilon: f64,
}

/// Start plus first visits: `L_w` and the per-event resistances `L_s`.
///
/// A walk starting at a terminal is reported as `([start], [0])`.
pub fn first_visits(walk: &Walk) -> (Vec<usize>, Vec<f64>) {
    let costs = walk.costs.as_ref().expect("weighted walk carries costs");
    if walk.vertices.len() == 1 {
        return (vec![walk.vertices[0]], vec![0.0]);
    }
    let lw = walk.vertices[1..].to_vec();
    let ls = costs.windows(2).map(|c| c[1] - c[0]).collect();
    (lw, ls)
}

/// Event-driven walk from `start` until a terminal, the event cap, or the
/// whole component (`component_size` vertices) has been visited.
pub fn generate_weighted_walk(
    g: &mut MultiGraph,
    start: usize,
    terminals: &TerminalSet,
    params: &WeightedWalkParams,
    component_size: usize,
    rng: &mut Rng,
) -> Result<Walk> {
    let mut vertices = vec![start];
    let mut edges = Vec::new();
    let mut costs = vec![0.0];
    if terminals.contains(start) {
        return Ok(Walk { vertices, edges, costs: Some(costs), status: WalkStatus::ReachedTerminal(start) });
    }
    let mut cur = start;
    let mut status = WalkStatus::Truncated;
    for _ in 0..params.event_cap {
        if vertices.len() >= component_size {
            status = WalkStatus::CoveredComponent;
            break;
        }
        let kernel = ExitKernel::new(g, &vertices, cur)?;
        let powers = kernel.powers(params.cover_bound);
        let x = sample_exit_time(&kernel, &powers, params.cover_bound, g.n(), rng)?;
        let (from, to, e) = sample_exit_edge(g, &kernel, &powers, x, rng)?;
        let inner = if x == 1 {
            0.0
        } else {
            let grid = BucketGrid::for_walk(params.epsilon, x - 1);
            let wk = WalkKernel::induced(g, &vertices, &grid);
            let iu = vertices.iter().position(|&y| y == cur).expect("current vertex visited");
            let iv = vertices.iter().position(|&y| y == from).expect("exit vertex visited");
            WeightSampler::new(&wk, iu, iv, x - 1, params.epsilon)?.sample(rng)
        };
        let step = inner + 1.0 / g.edge(e).expect("live edge").w;
        costs.push(costs[costs.len() - 1] + step);
        vertices.push(to);
        edges.push(e);
        cur = to;
        if terminals.contains(to) {
            status = WalkStatus::ReachedTerminal(to);
            break;
        }
    }
    if status == WalkStatus::Truncated && vertices.len() >= component_size {
        status = WalkStatus::CoveredComponent;
    }
    Ok(Walk { vertices, edges, costs: Some(costs), status })
}
