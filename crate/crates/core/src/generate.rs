//! Instance and stream generators. Streams are produced against a shadow
//! copy of the graph before any data structure sees them, so they are
//! independent of its random choices and every delete names a live edge.

use std::fmt;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::{parse_field, MultiGraph, WeightMode};
use crate::rng::{stream, Domain, Rng};

/// One stream operation.
#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    /// `I u v w`
    Insert(usize, usize, f64),
    /// `D u v`: removes the live `u`-`v` edge with the smallest id.
    Delete(usize, usize),
    /// `T u`
    Terminal(usize),
    /// `Q s t`: effective resistance.
    Query(usize, usize),
    /// `C u bu v bv`
    Change(usize, f64, usize, f64),
    /// `X u`: solution value at `u`.
    Solve(usize),
    /// `EN`
    Energy,
}

impl Op {
    pub fn is_query(&self) -> bool {
        matches!(self, Op::Query(..) | Op::Solve(_) | Op::Energy)
    }

    pub fn code(&self) -> &'static str {
        match self {
            Op::Insert(..) => "I",
            Op::Delete(..) => "D",
            Op::Terminal(_) => "T",
            Op::Query(..) => "Q",
            Op::Change(..) => "C",
            Op::Solve(_) => "X",
            Op::Energy => "EN",
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Op::Insert(u, v, w) => write!(f, "I {u} {v} {w}"),
            Op::Delete(u, v) => write!(f, "D {u} {v}"),
            Op::Terminal(u) => write!(f, "T {u}"),
            Op::Query(s, t) => write!(f, "Q {s} {t}"),
            Op::Change(u, bu, v, bv) => write!(f, "C {u} {bu} {v} {bv}"),
            Op::Solve(u) => write!(f, "X {u}"),
            Op::Energy => write!(f, "EN"),
        }
    }
}

/// Parses one op per line; blank lines and `#` comments are skipped.
pub fn read_stream<R: BufRead>(reader: R) -> Result<Vec<Op>> {
    let mut ops = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let ln = i + 1;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.is_empty() || f[0].starts_with('#') {
            continue;
        }
        let want = |k: usize| -> Result<()> {
            if f.len() == k + 1 {
                Ok(())
            } else {
                Err(Error::Parse { line: ln, msg: format!("`{}` takes {k} fields", f[0]) })
            }
        };
        let op = match f[0] {
            "I" => {
                want(3)?;
                Op::Insert(parse_field(f[1], ln)?, parse_field(f[2], ln)?, parse_field(f[3], ln)?)
            }
            "D" => {
                want(2)?;
                Op::Delete(parse_field(f[1], ln)?, parse_field(f[2], ln)?)
            }
            "T" => {
                want(1)?;
                Op::Terminal(parse_field(f[1], ln)?)
            }
            "Q" => {
                want(2)?;
                Op::Query(parse_field(f[1], ln)?, parse_field(f[2], ln)?)
            }
            "C" => {
                want(4)?;
                Op::Change(parse_field(f[1], ln)?, parse_field(f[2], ln)?, parse_field(f[3], ln)?, parse_field(f[4], ln)?)
            }
            "X" => {
                want(1)?;
                Op::Solve(parse_field(f[1], ln)?)
            }
            "EN" => {
                want(0)?;
                Op::Energy
            }
            other => return Err(Error::Parse { line: ln, msg: format!("unknown op `{other}`") }),
        };
        ops.push(op);
    }
    Ok(ops)
}

pub fn write_stream<W: Write>(ops: &[Op], mut out: W) -> Result<()> {
    for op in ops {
        writeln!(out, "{op}")?;
    }
    Ok(())
}

/// `n` lines `vertex value`; vertices not listed get 0.
pub fn read_demand<R: BufRead>(reader: R, n: usize) -> Result<Vec<f64>> {
    let mut b = vec![0.0; n];
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let ln = i + 1;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.is_empty() || f[0].starts_with('#') {
            continue;
        }
        if f.len() != 2 {
            return Err(Error::Parse { line: ln, msg: "expected `vertex value`".into() });
        }
        let v: usize = parse_field(f[0], ln)?;
        if v >= n {
            return Err(Error::Parse { line: ln, msg: format!("vertex {v} out of range for n = {n}") });
        }
        b[v] = parse_field(f[1], ln)?;
    }
    Ok(b)
}

pub fn write_demand<W: Write>(b: &[f64], mut out: W) -> Result<()> {
    for (v, x) in b.iter().enumerate() {
        writeln!(out, "{v} {x}")?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamKind {
    Mixed,
    InsertHeavy,
    QueryHeavy,
}

impl StreamKind {
    /// Insert, delete, and query weights.
    fn weights(self) -> [f64; 3] {
        match self {
            StreamKind::Mixed => [0.4, 0.3, 0.3],
            StreamKind::InsertHeavy => [0.7, 0.1, 0.2],
            StreamKind::QueryHeavy => [0.15, 0.15, 0.7],
        }
    }
}

impl std::str::FromStr for StreamKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mixed" => Ok(StreamKind::Mixed),
            "insert-heavy" => Ok(StreamKind::InsertHeavy),
            "query-heavy" => Ok(StreamKind::QueryHeavy),
            other => Err(Error::InvalidParameter(format!("unknown stream kind `{other}`"))),
        }
    }
}

fn random_weight(g: &MultiGraph, rng: &mut Rng) -> f64 {
    if g.is_weighted() {
        [1.0, 10.0, 100.0][rng.random_range(0..3)]
    } else {
        1.0
    }
}

fn random_pair(n: usize, rng: &mut Rng) -> (usize, usize) {
    loop {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u != v {
            return (u, v);
        }
    }
}

/// Resistance stream of `I`, `D`, and `Q` ops. Weighted graphs get insert
/// weights from {1, 10, 100}.
pub fn gen_stream(kind: StreamKind, g: &MultiGraph, length: usize, seed: u64) -> Vec<Op> {
    let mut rng = stream(seed, Domain::Stream, &[kind as u64, length as u64]);
    let mut shadow = g.clone();
    let n = g.n();
    let [pi, pd, _] = kind.weights();
    let mut ops = Vec::with_capacity(length);
    if n < 2 {
        return ops;
    }
    while ops.len() < length {
        let x: f64 = rng.random();
        if x < pi || (x < pi + pd && shadow.num_edges() == 0) {
            let (u, v) = random_pair(n, &mut rng);
            let w = random_weight(&shadow, &mut rng);
            shadow.insert_edge(u, v, w).expect("valid insert");
            ops.push(Op::Insert(u, v, w));
        } else if x < pi + pd {
            let ids: Vec<_> = shadow.edges().map(|(id, _)| id).collect();
            let id = ids[rng.random_range(0..ids.len())];
            let e = shadow.edge(id).expect("live").clone();
            // Replay deletes the smallest id on the pair; mirror that.
            let first = shadow.first_edge_between(e.u, e.v).expect("pair present");
            shadow.delete_edge(first).expect("live");
            ops.push(Op::Delete(e.u, e.v));
        } else {
            let (s, t) = random_pair(n, &mut rng);
            ops.push(Op::Query(s, t));
        }
    }
    ops
}

/// Solver stream of `I`, `D`, `C`, `X`, and `EN` ops. Inserts respect
/// `max_degree`, and changes keep the total demand fixed.
pub fn gen_demand_stream(g: &MultiGraph, b: &[f64], length: usize, max_degree: usize, seed: u64) -> Vec<Op> {
    let mut rng = stream(seed, Domain::Stream, &[7, length as u64]);
    let mut shadow = g.clone();
    let mut b = b.to_vec();
    let n = g.n();
    let mut ops = Vec::with_capacity(length);
    if n < 2 {
        return ops;
    }
    let mut attempts = 0;
    while ops.len() < length && attempts < 100 * length + 100 {
        attempts += 1;
        let x: f64 = rng.random();
        if x < 0.25 {
            let (u, v) = random_pair(n, &mut rng);
            if shadow.degree(u) < max_degree && shadow.degree(v) < max_degree {
                let w = random_weight(&shadow, &mut rng);
                shadow.insert_edge(u, v, w).expect("valid insert");
                ops.push(Op::Insert(u, v, w));
            }
        } else if x < 0.4 {
            if shadow.num_edges() > 0 {
                let ids: Vec<_> = shadow.edges().map(|(id, _)| id).collect();
                let e = shadow.edge(ids[rng.random_range(0..ids.len())]).expect("live").clone();
                let first = shadow.first_edge_between(e.u, e.v).expect("pair present");
                shadow.delete_edge(first).expect("live");
                ops.push(Op::Delete(e.u, e.v));
            }
        } else if x < 0.65 {
            let (u, v) = random_pair(n, &mut rng);
            let delta: f64 = rng.random::<f64>() - 0.5;
            let (bu, bv) = (b[u] + delta, b[v] - delta);
            b[u] = bu;
            b[v] = bv;
            ops.push(Op::Change(u, bu, v, bv));
        } else if x < 0.85 {
            ops.push(Op::Solve(rng.random_range(0..n)));
        } else {
            ops.push(Op::Energy);
        }
    }
    ops
}

/// Random demand with zero sum on every component.
pub fn gen_demand(g: &MultiGraph, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, Domain::Generator, &[3, g.n() as u64]);
    let mut b: Vec<f64> = (0..g.n()).map(|_| rng.random::<f64>() - 0.5).collect();
    let comps = g.components();
    let mut sums = vec![0.0; comps.count()];
    for v in 0..g.n() {
        sums[comps.of_vertex[v]] += b[v];
    }
    for v in 0..g.n() {
        let c = comps.of_vertex[v];
        b[v] -= sums[c] / comps.vertex_count[c] as f64;
    }
    b
}

/// Erdos-Renyi `G(n, p)`; weighted graphs draw weights from {1, 10, 100}.
pub fn gnp(n: usize, p: f64, weighted: bool, seed: u64) -> MultiGraph {
    let mut rng = stream(seed, Domain::Generator, &[1, n as u64]);
    let mode = if weighted { WeightMode::weighted() } else { WeightMode::Unweighted };
    let mut g = MultiGraph::new(n, mode);
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                let w = random_weight(&g, &mut rng);
                g.insert_edge(u, v, w).expect("valid edge");
            }
        }
    }
    g
}

/// `G(n, m)` style: `m` uniform random pairs, parallel edges allowed.
pub fn gnm(n: usize, m: usize, seed: u64) -> MultiGraph {
    let mut rng = stream(seed, Domain::Generator, &[4, n as u64, m as u64]);
    let mut g = MultiGraph::unweighted(n);
    for _ in 0..m {
        let (u, v) = random_pair(n, &mut rng);
        g.insert_edge(u, v, 1.0).expect("valid edge");
    }
    g
}

/// Connected graph of maximum degree `max_degree`: a path plus random chords.
pub fn bounded_degree(n: usize, max_degree: usize, seed: u64) -> MultiGraph {
    let mut rng = stream(seed, Domain::Generator, &[2, n as u64, max_degree as u64]);
    let mut g = MultiGraph::unweighted(n);
    for i in 1..n {
        g.insert_edge(i - 1, i, 1.0).expect("valid edge");
    }
    for _ in 0..2 * n {
        let (u, v) = random_pair(n.max(2), &mut rng);
        if n >= 2 && g.degree(u) < max_degree && g.degree(v) < max_degree {
            g.insert_edge(u, v, 1.0).expect("valid edge");
        }
    }
    g
}

/// Path on `n` vertices with weights alternating 1 and `n^10`.
pub fn gen_snake(n: usize) -> MultiGraph {
    let mut g = MultiGraph::new(n, WeightMode::weighted());
    let heavy = (n.max(2) as f64).powi(10);
    for i in 1..n {
        g.insert_edge(i - 1, i, if i % 2 == 1 { 1.0 } else { heavy }).expect("valid edge");
    }
    g
}

fn add_matchings(g: &mut MultiGraph, k: usize, count: usize, rng: &mut Rng) {
    let mut perm: Vec<usize> = (0..k).collect();
    for _ in 0..count {
        perm.shuffle(rng);
        for pair in perm.chunks_exact(2) {
            g.insert_edge(pair[0], pair[1], 1.0).expect("valid edge");
        }
    }
}

/// Second eigenvalue of the normalized Laplacian of `g` on vertices `0..k`.
pub fn normalized_lambda2(g: &MultiGraph, k: usize) -> f64 {
    let mut m = DMatrix::<f64>::zeros(k, k);
    for (_, e) in g.edges() {
        if e.u < k && e.v < k {
            m[(e.u, e.v)] -= e.w;
            m[(e.v, e.u)] -= e.w;
            m[(e.u, e.u)] += e.w;
            m[(e.v, e.v)] += e.w;
        }
    }
    let d: Vec<f64> = (0..k).map(|i| m[(i, i)]).collect();
    let norm = DMatrix::from_fn(k, k, |i, j| if d[i] > 0.0 && d[j] > 0.0 { m[(i, j)] / (d[i] * d[j]).sqrt() } else { 0.0 });
    let mut ev: Vec<f64> = norm.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.get(1).copied().unwrap_or(0.0)
}

/// Core on `0..k`: a cycle plus four random perfect matchings, redrawn until
/// the Cheeger lower bound `lambda_2 / 2` on its conductance is at least 0.1.
/// Core vertex `u` gets a ray of `floor(k/10)` fresh vertices.
pub fn gen_path_augmented_expander(k: usize, seed: u64) -> Result<MultiGraph> {
    if k < 10 {
        return Err(Error::InvalidParameter(format!("core size {k} must be at least 10")));
    }
    let ray = k / 10;
    let n = k + k * ray;
    for attempt in 0..100u64 {
        let mut rng = stream(seed, Domain::Generator, &[5, k as u64, attempt]);
        let mut g = MultiGraph::unweighted(n);
        for i in 0..k {
            g.insert_edge(i, (i + 1) % k, 1.0).expect("valid edge");
        }
        add_matchings(&mut g, k, 4, &mut rng);
        if normalized_lambda2(&g, k) / 2.0 < 0.1 {
            continue;
        }
        for u in 0..k {
            let mut prev = u;
            for j in 0..ray {
                let x = k + u * ray + j;
                g.insert_edge(prev, x, 1.0).expect("valid edge");
                prev = x;
            }
        }
        return Ok(g);
    }
    Err(Error::InvalidParameter(format!("no expanding core found for k = {k}")))
}

/// Random `d`-regular-ish expander: union of `d` random perfect matchings.
pub fn gen_expander(n: usize, d: usize, seed: u64) -> MultiGraph {
    let mut rng = stream(seed, Domain::Generator, &[6, n as u64, d as u64]);
    let mut g = MultiGraph::unweighted(n);
    for i in 0..n {
        g.insert_edge(i, (i + 1) % n, 1.0).expect("valid edge");
    }
    add_matchings(&mut g, n, d.saturating_sub(2), &mut rng);
    g
}
