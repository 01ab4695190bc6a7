//! Weighted multigraph with per-vertex Fenwick incidence indices.
//!
//! Edge ids are never reused. Each vertex keeps its incident edges in a slot
//! array mirrored by a Fenwick tree over the slot weights, so weighted
//! neighbor sampling and prefix queries take `O(log deg)`.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightMode {
    /// Every edge has weight exactly 1.
    Unweighted,
    /// Weights lie in `[1, n^max_exponent]`.
    Weighted { max_exponent: f64 },
    /// Any positive finite weight; used for derived graphs such as sparsifiers.
    Real,
}

impl WeightMode {
    pub fn weighted() -> Self {
        WeightMode::Weighted { max_exponent: 10.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
    slot_u: usize,
    slot_v: usize,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Fenwick tree over nonnegative slot weights.
#[derive(Clone, Debug, Default)]
pub struct IncidenceIndex {
    values: Vec<f64>,
    // 1-based; tree[0] is unused.
    tree: Vec<f64>,
}

#[inline]
fn lowbit(i: usize) -> usize {
    i & i.wrapping_neg()
}

impl IncidenceIndex {
    pub fn new() -> Self {
        IncidenceIndex { values: Vec::new(), tree: vec![0.0] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, slot: usize) -> f64 {
        self.values[slot]
    }

    pub fn push(&mut self, w: f64) {
        let i = self.values.len() + 1;
        let mut acc = w;
        let stop = i - lowbit(i);
        let mut j = i - 1;
        while j > stop {
            acc += self.tree[j];
            j -= lowbit(j);
        }
        self.values.push(w);
        self.tree.push(acc);
    }

    /// Removes the last slot. No other node covers it, so this is exact.
    pub fn pop(&mut self) -> Option<f64> {
        let v = self.values.pop()?;
        self.tree.pop();
        Some(v)
    }

    pub fn set(&mut self, slot: usize, w: f64) {
        let delta = w - self.values[slot];
        self.values[slot] = w;
        let mut i = slot + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += lowbit(i);
        }
    }

    /// Sum of the first `k` slots.
    pub fn prefix(&self, k: usize) -> f64 {
        let mut i = k;
        let mut s = 0.0;
        while i > 0 {
            s += self.tree[i];
            i -= lowbit(i);
        }
        s
    }

    pub fn total(&self) -> f64 {
        self.prefix(self.values.len())
    }

    /// Smallest slot whose inclusive prefix sum exceeds `x`.
    /// Falls back to the last positive slot when rounding pushes `x` past the total.
    pub fn find(&self, mut x: f64) -> Option<usize> {
        let len = self.values.len();
        if len == 0 {
            return None;
        }
        let mut pos = 0;
        let mut mask = 1usize << (usize::BITS - 1 - len.leading_zeros());
        while mask > 0 {
            let next = pos + mask;
            if next <= len && self.tree[next] <= x {
                pos = next;
                x -= self.tree[next];
            }
            mask >>= 1;
        }
        if pos < len && self.values[pos] > 0.0 {
            return Some(pos);
        }
        self.values.iter().rposition(|&v| v > 0.0)
    }

    /// Draws a slot with probability proportional to its weight.
    pub fn sample(&self, rng: &mut Rng) -> Option<usize> {
        let total = self.total();
        if total <= 0.0 {
            return None;
        }
        self.find(rng.random::<f64>() * total)
    }

    /// Runs `f` with the given slots zeroed, then restores the index bit for bit.
    pub fn with_masked<R>(&mut self, slots: &[usize], f: impl FnOnce(&Self) -> R) -> R {
        let mut undo: Vec<(bool, usize, f64)> = Vec::new();
        for &s in slots {
            if self.values[s] == 0.0 {
                continue;
            }
            undo.push((false, s, self.values[s]));
            let delta = -self.values[s];
            self.values[s] = 0.0;
            let mut i = s + 1;
            while i < self.tree.len() {
                undo.push((true, i, self.tree[i]));
                self.tree[i] += delta;
                i += lowbit(i);
            }
        }
        let out = f(self);
        for &(is_tree, i, old) in undo.iter().rev() {
            if is_tree {
                self.tree[i] = old;
            } else {
                self.values[i] = old;
            }
        }
        out
    }

    #[cfg(test)]
    fn raw(&self) -> (Vec<u64>, Vec<u64>) {
        (
            self.values.iter().map(|v| v.to_bits()).collect(),
            self.tree.iter().map(|v| v.to_bits()).collect(),
        )
    }
}

/// Connected components of a graph snapshot.
#[derive(Clone, Debug)]
pub struct Components {
    pub of_vertex: Vec<usize>,
    pub vertex_count: Vec<usize>,
    pub edge_count: Vec<usize>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.vertex_count.len()
    }

    pub fn same(&self, u: usize, v: usize) -> bool {
        self.of_vertex[u] == self.of_vertex[v]
    }
}

#[derive(Clone, Debug)]
pub struct MultiGraph {
    n: usize,
    mode: WeightMode,
    edges: Vec<Option<Edge>>,
    adj: Vec<Vec<(usize, EdgeId)>>,
    inc: Vec<IncidenceIndex>,
    wdeg: Vec<f64>,
    pairs: BTreeMap<(usize, usize), Vec<EdgeId>>,
    live: usize,
}

fn key(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl MultiGraph {
    pub fn new(n: usize, mode: WeightMode) -> Self {
        MultiGraph {
            n,
            mode,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
            inc: (0..n).map(|_| IncidenceIndex::new()).collect(),
            wdeg: vec![0.0; n],
            pairs: BTreeMap::new(),
            live: 0,
        }
    }

    pub fn unweighted(n: usize) -> Self {
        Self::new(n, WeightMode::Unweighted)
    }

    pub fn from_edges(n: usize, mode: WeightMode, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut g = Self::new(n, mode);
        for &(u, v, w) in edges {
            g.insert_edge(u, v, w)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> WeightMode {
        self.mode
    }

    pub fn is_weighted(&self) -> bool {
        !matches!(self.mode, WeightMode::Unweighted)
    }

    /// Number of live edges.
    pub fn num_edges(&self) -> usize {
        self.live
    }

    /// One past the largest edge id ever issued.
    pub fn edge_id_bound(&self) -> usize {
        self.edges.len()
    }

    /// Admissible weight interval for the current mode.
    pub fn weight_bounds(&self) -> (f64, f64) {
        match self.mode {
            WeightMode::Unweighted => (1.0, 1.0),
            WeightMode::Weighted { max_exponent } => (1.0, (self.n.max(2) as f64).powf(max_exponent)),
            WeightMode::Real => (f64::MIN_POSITIVE, f64::MAX),
        }
    }

    fn check_vertex(&self, u: usize) -> Result<()> {
        if u >= self.n {
            return Err(Error::VertexOutOfRange { vertex: u, n: self.n });
        }
        Ok(())
    }

    pub fn insert_edge(&mut self, u: usize, v: usize, w: f64) -> Result<EdgeId> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        let (min, max) = self.weight_bounds();
        if !(w >= min && w <= max && w.is_finite()) {
            return Err(Error::WeightOutOfRange { weight: w, min, max });
        }
        let id = EdgeId(self.edges.len());
        let slot_u = self.adj[u].len();
        self.adj[u].push((v, id));
        self.inc[u].push(w);
        let slot_v = self.adj[v].len();
        self.adj[v].push((u, id));
        self.inc[v].push(w);
        self.wdeg[u] += w;
        self.wdeg[v] += w;
        self.edges.push(Some(Edge { u, v, w, slot_u, slot_v }));
        self.pairs.entry(key(u, v)).or_default().push(id);
        self.live += 1;
        Ok(id)
    }

    fn detach_slot(&mut self, x: usize, slot: usize) {
        let last = self.adj[x].len() - 1;
        if slot != last {
            let (nbr, moved) = self.adj[x][last];
            self.adj[x][slot] = (nbr, moved);
            let w = self.inc[x].value(last);
            self.inc[x].set(slot, w);
            let e = self.edges[moved.0].as_mut().expect("live edge in adjacency");
            if e.u == x && e.slot_u == last {
                e.slot_u = slot;
            } else {
                e.slot_v = slot;
            }
        }
        self.adj[x].pop();
        self.inc[x].pop();
    }

    pub fn delete_edge(&mut self, id: EdgeId) -> Result<Edge> {
        let e = self.edges.get_mut(id.0).and_then(Option::take).ok_or(Error::UnknownEdge(id))?;
        self.detach_slot(e.u, e.slot_u);
        self.detach_slot(e.v, e.slot_v);
        self.wdeg[e.u] -= e.w;
        self.wdeg[e.v] -= e.w;
        if self.adj[e.u].is_empty() {
            self.wdeg[e.u] = 0.0;
        }
        if self.adj[e.v].is_empty() {
            self.wdeg[e.v] = 0.0;
        }
        let k = key(e.u, e.v);
        let list = self.pairs.get_mut(&k).expect("pair index entry");
        list.retain(|&x| x != id);
        if list.is_empty() {
            self.pairs.remove(&k);
        }
        self.live -= 1;
        Ok(e)
    }

    /// The live edge between `u` and `v` with the smallest id.
    pub fn first_edge_between(&self, u: usize, v: usize) -> Result<EdgeId> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        self.edges_between(u, v).first().copied().ok_or(Error::NoSuchEdge(u, v))
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.get(id.0).and_then(Option::as_ref)
    }

    pub fn contains_edge(&self, id: EdgeId) -> bool {
        self.edge(id).is_some()
    }

    /// Live edges in id order.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &Edge)> + '_ {
        self.edges.iter().enumerate().filter_map(|(i, e)| e.as_ref().map(|e| (EdgeId(i), e)))
    }

    pub fn neighbors(&self, u: usize) -> &[(usize, EdgeId)] {
        &self.adj[u]
    }

    /// Number of incident edges, counting multiplicity.
    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn weighted_degree(&self, u: usize) -> f64 {
        self.wdeg[u]
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edges_between(&self, u: usize, v: usize) -> &[EdgeId] {
        self.pairs.get(&key(u, v)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn pair_weight(&self, u: usize, v: usize) -> f64 {
        self.edges_between(u, v).iter().map(|&e| self.edges[e.0].as_ref().map_or(0.0, |e| e.w)).sum()
    }

    pub fn incidence(&self, u: usize) -> &IncidenceIndex {
        &self.inc[u]
    }

    /// Slot of edge `id` in the adjacency of its endpoint `x`.
    pub fn slot_of(&self, id: EdgeId, x: usize) -> Option<usize> {
        let e = self.edge(id)?;
        if e.u == x {
            Some(e.slot_u)
        } else if e.v == x {
            Some(e.slot_v)
        } else {
            None
        }
    }

    pub fn min_max_weight(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for (_, e) in self.edges() {
            lo = lo.min(e.w);
            hi = hi.max(e.w);
        }
        if hi == 0.0 {
            (1.0, 1.0)
        } else {
            (lo, hi)
        }
    }

    /// Neighbor of `u` chosen with probability proportional to edge weight.
    pub fn random_incident(&self, u: usize, rng: &mut Rng) -> Result<(usize, EdgeId)> {
        let d = self.adj[u].len();
        if d == 0 {
            return Err(Error::IsolatedVertex(u));
        }
        let slot = if self.is_weighted() {
            self.inc[u].sample(rng).ok_or(Error::IsolatedVertex(u))?
        } else {
            rng.random_range(0..d)
        };
        Ok(self.adj[u][slot])
    }

    /// Edge leaving `v` chosen proportionally to weight among edges whose other
    /// endpoint is not in `excluded`. The incidence index is masked in place and
    /// restored exactly afterwards.
    pub fn random_incident_excluding(
        &mut self,
        v: usize,
        excluded: &[usize],
        rng: &mut Rng,
    ) -> Option<(usize, EdgeId)> {
        let mut slots = Vec::new();
        for &z in excluded {
            if z == v {
                continue;
            }
            if let Some(list) = self.pairs.get(&key(v, z)) {
                for &id in list {
                    let e = self.edges[id.0].as_ref().expect("live edge");
                    slots.push(if e.u == v { e.slot_u } else { e.slot_v });
                }
            }
        }
        let slot = self.inc[v].with_masked(&slots, |idx| idx.sample(rng))?;
        Some(self.adj[v][slot])
    }

    pub fn components(&self) -> Components {
        let mut of_vertex = vec![usize::MAX; self.n];
        let mut vertex_count = Vec::new();
        let mut stack = Vec::new();
        for s in 0..self.n {
            if of_vertex[s] != usize::MAX {
                continue;
            }
            let c = vertex_count.len();
            of_vertex[s] = c;
            let mut count = 0;
            stack.push(s);
            while let Some(x) = stack.pop() {
                count += 1;
                for &(y, _) in &self.adj[x] {
                    if of_vertex[y] == usize::MAX {
                        of_vertex[y] = c;
                        stack.push(y);
                    }
                }
            }
            vertex_count.push(count);
        }
        let mut edge_count = vec![0; vertex_count.len()];
        for (_, e) in self.edges() {
            edge_count[of_vertex[e.u]] += 1;
        }
        Components { of_vertex, vertex_count, edge_count }
    }

    /// Parses `n m weighted|unweighted` followed by `m` lines `u v w`.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate().filter_map(|(i, l)| match l {
            Ok(l) if l.trim().is_empty() || l.trim_start().starts_with('#') => None,
            other => Some((i + 1, other)),
        });
        let (hl, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
        let header = header?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::Parse { line: hl, msg: "expected `n m weighted|unweighted`".into() });
        }
        let n: usize = parse_field(parts[0], hl)?;
        let m: usize = parse_field(parts[1], hl)?;
        let mode = match parts[2] {
            "weighted" => WeightMode::weighted(),
            "unweighted" => WeightMode::Unweighted,
            other => return Err(Error::Parse { line: hl, msg: format!("unknown weight mode `{other}`") }),
        };
        let mut g = MultiGraph::new(n, mode);
        for _ in 0..m {
            let (ln, line) = lines.next().ok_or(Error::Parse { line: hl, msg: format!("expected {m} edges") })?;
            let line = line?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::Parse { line: ln, msg: "expected `u v w`".into() });
            }
            let u = parse_field(f[0], ln)?;
            let v = parse_field(f[1], ln)?;
            let w: f64 = parse_field(f[2], ln)?;
            g.insert_edge(u, v, w).map_err(|e| Error::Parse { line: ln, msg: e.to_string() })?;
        }
        Ok(g)
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let mode = if self.is_weighted() { "weighted" } else { "unweighted" };
        writeln!(out, "{} {} {}", self.n, self.live, mode)?;
        for (_, e) in self.edges() {
            writeln!(out, "{} {} {}", e.u, e.v, e.w)?;
        }
        Ok(())
    }
}

pub(crate) fn parse_field<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Parse { line, msg: format!("cannot parse `{s}`") })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Domain};
    use proptest::prelude::*;

    fn path(n: usize) -> MultiGraph {
        let mut g = MultiGraph::unweighted(n);
        for i in 0..n - 1 {
            g.insert_edge(i, i + 1, 1.0).unwrap();
        }
        g
    }

    #[test]
    fn fenwick_prefix_and_find() {
        let mut idx = IncidenceIndex::new();
        for w in [1.0, 2.0, 0.0, 4.0, 3.0] {
            idx.push(w);
        }
        assert_eq!(idx.total(), 10.0);
        assert_eq!(idx.prefix(3), 3.0);
        assert_eq!(idx.find(0.5), Some(0));
        assert_eq!(idx.find(1.0), Some(1));
        assert_eq!(idx.find(2.99), Some(1));
        // The zero-weight slot 2 is never chosen.
        assert_eq!(idx.find(3.0), Some(3));
        assert_eq!(idx.find(9.99), Some(4));
        assert_eq!(idx.find(50.0), Some(4));
        idx.pop();
        assert_eq!(idx.total(), 7.0);
    }

    #[test]
    fn masking_restores_exactly() {
        let mut idx = IncidenceIndex::new();
        for k in 0..37 {
            idx.push(0.1 * k as f64 + 1.0 / 3.0);
        }
        let before = idx.raw();
        let t = idx.with_masked(&[0, 5, 17, 36], |i| i.total());
        assert!(t < idx.total());
        assert_eq!(idx.raw(), before);
    }

    #[test]
    fn weighted_neighbor_frequencies() {
        let mut g = MultiGraph::new(4, WeightMode::weighted());
        g.insert_edge(0, 1, 1.0).unwrap();
        g.insert_edge(0, 2, 3.0).unwrap();
        g.insert_edge(0, 3, 6.0).unwrap();
        let mut rng = stream(1, Domain::Test, &[]);
        let mut counts = [0usize; 4];
        let draws = 100_000;
        for _ in 0..draws {
            counts[g.random_incident(0, &mut rng).unwrap().0] += 1;
        }
        for (v, p) in [(1, 0.1), (2, 0.3), (3, 0.6)] {
            let f = counts[v] as f64 / draws as f64;
            assert!((f - p).abs() < 0.01, "vertex {v}: {f} vs {p}");
        }
    }

    #[test]
    fn excluding_skips_masked_neighbors() {
        let mut g = MultiGraph::new(4, WeightMode::weighted());
        g.insert_edge(0, 1, 5.0).unwrap();
        g.insert_edge(0, 2, 1.0).unwrap();
        g.insert_edge(0, 3, 1.0).unwrap();
        g.insert_edge(0, 1, 2.0).unwrap();
        let mut rng = stream(2, Domain::Test, &[]);
        for _ in 0..200 {
            let (z, _) = g.random_incident_excluding(0, &[1, 3], &mut rng).unwrap();
            assert_eq!(z, 2);
        }
        assert!(g.random_incident_excluding(0, &[1, 2, 3], &mut rng).is_none());
        assert_eq!(g.incidence(0).total(), 9.0);
    }

    #[test]
    fn delete_between_picks_smallest_id() {
        let mut g = MultiGraph::unweighted(3);
        let a = g.insert_edge(0, 1, 1.0).unwrap();
        let b = g.insert_edge(1, 0, 1.0).unwrap();
        assert_eq!(g.first_edge_between(1, 0).unwrap(), a);
        g.delete_edge(a).unwrap();
        assert_eq!(g.first_edge_between(0, 1).unwrap(), b);
        assert!(matches!(g.delete_edge(a), Err(Error::UnknownEdge(_))));
    }

    #[test]
    fn rejects_bad_edges() {
        let mut g = MultiGraph::unweighted(3);
        assert!(matches!(g.insert_edge(1, 1, 1.0), Err(Error::SelfLoop(1))));
        assert!(matches!(g.insert_edge(0, 3, 1.0), Err(Error::VertexOutOfRange { .. })));
        assert!(matches!(g.insert_edge(0, 1, 2.0), Err(Error::WeightOutOfRange { .. })));
        let mut h = MultiGraph::new(3, WeightMode::Weighted { max_exponent: 2.0 });
        assert!(h.insert_edge(0, 1, 9.0).is_ok());
        assert!(h.insert_edge(0, 1, 9.5).is_err());
        assert!(h.insert_edge(0, 1, 0.5).is_err());
    }

    #[test]
    fn isolated_vertex_has_no_neighbor() {
        let g = MultiGraph::unweighted(2);
        let mut rng = stream(0, Domain::Test, &[]);
        assert!(matches!(g.random_incident(0, &mut rng), Err(Error::IsolatedVertex(0))));
    }

    #[test]
    fn components_count_edges() {
        let mut g = path(4);
        g.insert_edge(0, 1, 1.0).unwrap();
        let mut h = MultiGraph::unweighted(6);
        for (_, e) in g.edges() {
            h.insert_edge(e.u, e.v, e.w).unwrap();
        }
        h.insert_edge(4, 5, 1.0).unwrap();
        let c = h.components();
        assert_eq!(c.count(), 2);
        assert_eq!(c.edge_count[c.of_vertex[0]], 4);
        assert_eq!(c.vertex_count[c.of_vertex[5]], 2);
    }

    #[test]
    fn file_round_trip() {
        let mut g = MultiGraph::new(4, WeightMode::weighted());
        g.insert_edge(0, 1, 2.5).unwrap();
        g.insert_edge(2, 3, 7.0).unwrap();
        g.insert_edge(0, 1, 1.0).unwrap();
        let mut buf = Vec::new();
        g.write(&mut buf).unwrap();
        let h = MultiGraph::read(buf.as_slice()).unwrap();
        assert_eq!(h.num_edges(), 3);
        assert_eq!(h.pair_weight(0, 1), 3.5);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "3 2 unweighted\n0 1 1\n0 x 1\n";
        match MultiGraph::read(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[derive(Clone, Debug)]
    enum Op {
        Insert(usize, usize, u8),
        Delete(usize),
    }

    fn op() -> impl Strategy<Value = Op> {
        prop_oneof![
            (0usize..8, 0usize..8, 1u8..20).prop_map(|(u, v, w)| Op::Insert(u, v, w)),
            (0usize..64).prop_map(Op::Delete),
        ]
    }

    proptest! {
        #[test]
        fn degrees_and_indices_stay_consistent(ops in proptest::collection::vec(op(), 1..120)) {
            let mut g = MultiGraph::new(8, WeightMode::Weighted { max_exponent: 2.0 });
            for o in ops {
                match o {
                    Op::Insert(u, v, w) => { let _ = g.insert_edge(u, v, w as f64); }
                    Op::Delete(k) => {
                        let live: Vec<EdgeId> = g.edges().map(|(id, _)| id).collect();
                        if !live.is_empty() {
                            g.delete_edge(live[k % live.len()]).unwrap();
                        }
                    }
                }
                for u in 0..8 {
                    let naive: f64 = g.edges().filter(|(_, e)| e.u == u || e.v == u).map(|(_, e)| e.w).sum();
                    prop_assert_eq!(g.weighted_degree(u), naive);
                    prop_assert_eq!(g.incidence(u).total(), naive);
                    prop_assert_eq!(g.degree(u), g.incidence(u).len());
                    for (slot, &(z, id)) in g.neighbors(u).iter().enumerate() {
                        prop_assert_eq!(g.slot_of(id, u), Some(slot));
                        prop_assert_eq!(g.edge(id).unwrap().other(u), z);
                        prop_assert_eq!(g.incidence(u).value(slot), g.edge(id).unwrap().w);
                    }
                }
            }
        }
    }
}
