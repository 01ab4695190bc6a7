//! Walk storage and the unweighted truncated walk engine.
//!
//! Walks live in flat arenas. Every walk belongs to a sample: one copy of an
//! original edge `e = (u, v)`, made of a half walk from `u` and a half walk
//! from `v`. When both halves end at terminals the sample contributes the
//! edge `(t_0, t_1)` with weight `1 / (rho * s)`, where `s` is the total
//! resistance along `t_0 .. u -e- v .. t_1`.
//!
//! `by_vertex[x]` lists `(walk, first position of x)`. Entries go stale when a
//! walk is shortened below that position or removed; they are validated on
//! read and compacted as they are found, so cleanup is charged to the steps
//! that were cut.

use std::io::Write;

use crate::graph::{EdgeId, MultiGraph};
use crate::rng::Rng;

pub type WalkId = u32;
pub type SampleId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WalkStatus {
    ReachedTerminal(usize),
    Truncated,
    CoveredComponent,
}

impl std::fmt::Display for WalkStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WalkStatus::ReachedTerminal(t) => write!(f, "terminal:{t}"),
            WalkStatus::Truncated => write!(f, "truncated"),
            WalkStatus::CoveredComponent => write!(f, "covered"),
        }
    }
}

/// Membership plus insertion order.
#[derive(Clone, Debug)]
pub struct TerminalSet {
    member: Vec<bool>,
    order: Vec<usize>,
}

impl TerminalSet {
    pub fn new(n: usize) -> Self {
        TerminalSet { member: vec![false; n], order: Vec::new() }
    }

    pub fn from_slice(n: usize, ts: &[usize]) -> Self {
        let mut s = Self::new(n);
        for &t in ts {
            s.insert(t);
        }
        s
    }

    /// Returns false when `t` was already present.
    pub fn insert(&mut self, t: usize) -> bool {
        if self.member[t] {
            return false;
        }
        self.member[t] = true;
        self.order.push(t);
        true
    }

    #[inline]
    pub fn contains(&self, t: usize) -> bool {
        self.member[t]
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Terminals in insertion order.
    pub fn as_slice(&self) -> &[usize] {
        &self.order
    }

    pub fn sorted(&self) -> Vec<usize> {
        let mut v = self.order.clone();
        v.sort_unstable();
        v
    }

    pub fn capacity(&self) -> usize {
        self.member.len()
    }
}

/// Truncation constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkParams {
    pub c_dist: f64,
    pub c_len: f64,
    pub c_bf: f64,
}

impl Default for WalkParams {
    fn default() -> Self {
        WalkParams { c_dist: 2.0, c_len: 4.0, c_bf: 4.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WalkCaps {
    /// Distinct edges (unweighted) or first-visit events (weighted).
    pub distinct: usize,
    pub steps: u64,
}

impl WalkParams {
    pub fn caps(&self, beta: f64, n: usize) -> WalkCaps {
        let ln = (n.max(2) as f64).ln();
        let distinct = (self.c_dist * ln / beta).ceil().max(1.0) as usize;
        let steps = (self.c_bf * self.c_len * ln.powi(3) / (beta * beta)).ceil().max(1.0);
        WalkCaps { distinct, steps: steps.min(u64::MAX as f64) as u64 }
    }
}

/// A generated walk before it is stored.
///
/// For unweighted walks `vertices` is the full step sequence and `edges[i]`
/// joins `vertices[i]` and `vertices[i + 1]`. For weighted walks `vertices`
/// is the start followed by first visits, `edges[i]` is the edge that first
/// entered `vertices[i + 1]`, and `costs[p]` is the resistance accumulated up
/// to position `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct Walk {
    pub vertices: Vec<usize>,
    pub edges: Vec<EdgeId>,
    pub costs: Option<Vec<f64>>,
    pub status: WalkStatus,
}

impl Walk {
    pub fn trivial(t: usize) -> Self {
        Walk { vertices: vec![t], edges: Vec::new(), costs: None, status: WalkStatus::ReachedTerminal(t) }
    }

    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() == 1
    }
}

/// Reusable marks for counting distinct items.
#[derive(Clone, Debug, Default)]
pub struct Marks {
    stamp: Vec<u32>,
    current: u32,
}

impl Marks {
    pub fn reset(&mut self, size: usize) {
        if self.stamp.len() < size {
            self.stamp.resize(size, 0);
        }
        self.current = self.current.wrapping_add(1);
        if self.current == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.current = 1;
        }
    }

    /// Marks `i` and returns true when it was unmarked.
    #[inline]
    pub fn mark(&mut self, i: usize) -> bool {
        if self.stamp[i] == self.current {
            false
        } else {
            self.stamp[i] = self.current;
            true
        }
    }
}

/// Simple random walk from `start` that stops at the first terminal, after
/// `caps.distinct` distinct edges, after covering all `component_edges` edges
/// of its component, or after `caps.steps` steps.
pub fn generate_walk(
    g: &MultiGraph,
    start: usize,
    terminals: &TerminalSet,
    caps: WalkCaps,
    component_edges: usize,
    rng: &mut Rng,
    marks: &mut Marks,
) -> Walk {
    let mut vertices = vec![start];
    let mut edges = Vec::new();
    if terminals.contains(start) {
        return Walk { vertices, edges, costs: None, status: WalkStatus::ReachedTerminal(start) };
    }
    if g.degree(start) == 0 {
        return Walk { vertices, edges, costs: None, status: WalkStatus::CoveredComponent };
    }
    marks.reset(g.edge_id_bound());
    let mut distinct = 0usize;
    let mut cur = start;
    let status = loop {
        let (next, e) = g.random_incident(cur, rng).expect("walk vertex has an incident edge");
        if marks.mark(e.0) {
            distinct += 1;
        }
        vertices.push(next);
        edges.push(e);
        cur = next;
        if terminals.contains(cur) {
            break WalkStatus::ReachedTerminal(cur);
        }
        if distinct >= caps.distinct {
            break WalkStatus::Truncated;
        }
        if distinct >= component_edges {
            break WalkStatus::CoveredComponent;
        }
        if edges.len() as u64 >= caps.steps {
            break WalkStatus::Truncated;
        }
    };
    Walk { vertices, edges, costs: None, status }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HEdge {
    pub a: usize,
    pub b: usize,
    pub w: f64,
}

/// Change of one sample's contribution to `H`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HDelta {
    pub sample: SampleId,
    pub old: Option<HEdge>,
    pub new: Option<HEdge>,
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    v_off: usize,
    e_off: usize,
    // usize::MAX for walks whose cost is their length.
    c_off: usize,
    len: u32,
    status: WalkStatus,
    sample: SampleId,
    alive: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub origin: EdgeId,
    pub halves: [WalkId; 2],
    /// Resistance `1 / w_e` of the origin edge.
    pub base_cost: f64,
    pub alive: bool,
}

/// Read-only view of a stored walk.
#[derive(Clone, Copy, Debug)]
pub struct WalkView<'a> {
    pub id: WalkId,
    pub vertices: &'a [u32],
    pub edges: &'a [u32],
    pub costs: Option<&'a [f64]>,
    pub status: WalkStatus,
    pub sample: SampleId,
}

impl WalkView<'_> {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn last(&self) -> usize {
        *self.vertices.last().expect("walk has a start") as usize
    }

    pub fn cost(&self) -> f64 {
        match self.costs {
            Some(c) => c[self.len()],
            None => self.len() as f64,
        }
    }
}

#[derive(Clone, Debug)]
pub struct WalkStore {
    entries: Vec<Entry>,
    verts: Vec<u32>,
    edges: Vec<u32>,
    costs: Vec<f64>,
    by_vertex: Vec<Vec<(WalkId, u32)>>,
    by_edge: Vec<Vec<(WalkId, u32)>>,
    samples: Vec<Sample>,
    samples_of_edge: Vec<Vec<SampleId>>,
    marks: Marks,
    edge_marks: Marks,
    live_samples: usize,
    /// Steps removed by shortening since construction.
    pub shortened_steps: u64,
}

impl WalkStore {
    pub fn new(n: usize) -> Self {
        WalkStore {
            entries: Vec::new(),
            verts: Vec::new(),
            edges: Vec::new(),
            costs: Vec::new(),
            by_vertex: vec![Vec::new(); n],
            by_edge: Vec::new(),
            samples: Vec::new(),
            samples_of_edge: Vec::new(),
            marks: Marks::default(),
            edge_marks: Marks::default(),
            live_samples: 0,
            shortened_steps: 0,
        }
    }

    pub fn num_samples(&self) -> usize {
        self.live_samples
    }

    pub fn sample_id_bound(&self) -> usize {
        self.samples.len()
    }

    pub fn sample(&self, s: SampleId) -> &Sample {
        &self.samples[s as usize]
    }

    pub fn samples(&self) -> impl Iterator<Item = (SampleId, &Sample)> + '_ {
        self.samples.iter().enumerate().filter(|(_, s)| s.alive).map(|(i, s)| (i as SampleId, s))
    }

    pub fn samples_of(&self, e: EdgeId) -> &[SampleId] {
        self.samples_of_edge.get(e.0).map(Vec::as_slice).unwrap_or(&[])
    }

    fn push_walk(&mut self, w: &Walk, sample: SampleId) -> WalkId {
        let id = self.entries.len() as WalkId;
        let v_off = self.verts.len();
        let e_off = self.edges.len();
        self.verts.extend(w.vertices.iter().map(|&v| v as u32));
        self.edges.extend(w.edges.iter().map(|e| e.0 as u32));
        let c_off = match &w.costs {
            Some(c) => {
                debug_assert_eq!(c.len(), w.vertices.len());
                let off = self.costs.len();
                self.costs.extend_from_slice(c);
                off
            }
            None => usize::MAX,
        };
        self.marks.reset(self.by_vertex.len());
        for (p, &v) in w.vertices.iter().enumerate() {
            if self.marks.mark(v) {
                self.by_vertex[v].push((id, p as u32));
            }
        }
        if let Some(max_e) = w.edges.iter().map(|e| e.0).max() {
            if self.by_edge.len() <= max_e {
                self.by_edge.resize(max_e + 1, Vec::new());
            }
            self.edge_marks.reset(self.by_edge.len());
            for (i, e) in w.edges.iter().enumerate() {
                if self.edge_marks.mark(e.0) {
                    self.by_edge[e.0].push((id, i as u32));
                }
            }
        }
        self.entries.push(Entry { v_off, e_off, c_off, len: w.len() as u32, status: w.status, sample, alive: true });
        id
    }

    /// Stores a sample of edge `origin` whose halves start at its two endpoints.
    pub fn add_sample(&mut self, origin: EdgeId, base_cost: f64, halves: [Walk; 2]) -> SampleId {
        let sid = self.samples.len() as SampleId;
        let h0 = self.push_walk(&halves[0], sid);
        let h1 = self.push_walk(&halves[1], sid);
        self.samples.push(Sample { origin, halves: [h0, h1], base_cost, alive: true });
        if self.samples_of_edge.len() <= origin.0 {
            self.samples_of_edge.resize(origin.0 + 1, Vec::new());
        }
        self.samples_of_edge[origin.0].push(sid);
        self.live_samples += 1;
        sid
    }

    pub fn walk(&self, id: WalkId) -> WalkView<'_> {
        let e = &self.entries[id as usize];
        let len = e.len as usize;
        WalkView {
            id,
            vertices: &self.verts[e.v_off..e.v_off + len + 1],
            edges: &self.edges[e.e_off..e.e_off + len],
            costs: (e.c_off != usize::MAX).then(|| &self.costs[e.c_off..e.c_off + len + 1]),
            status: e.status,
            sample: e.sample,
        }
    }

    pub fn is_alive(&self, id: WalkId) -> bool {
        self.entries[id as usize].alive
    }

    /// Live walks in id order.
    pub fn walks(&self) -> impl Iterator<Item = WalkView<'_>> + '_ {
        (0..self.entries.len() as WalkId).filter(|&i| self.entries[i as usize].alive).map(|i| self.walk(i))
    }

    /// Contribution of sample `s` to `H`, if both halves end at terminals.
    pub fn h_edge(&self, s: SampleId, rho: usize) -> Option<HEdge> {
        let sample = &self.samples[s as usize];
        if !sample.alive {
            return None;
        }
        let w0 = self.walk(sample.halves[0]);
        let w1 = self.walk(sample.halves[1]);
        match (w0.status, w1.status) {
            (WalkStatus::ReachedTerminal(a), WalkStatus::ReachedTerminal(b)) => {
                let s = w0.cost() + w1.cost() + sample.base_cost;
                Some(HEdge { a, b, w: 1.0 / (rho as f64 * s) })
            }
            _ => None,
        }
    }

    fn valid_vertex_entry(&self, x: usize, (w, p): (WalkId, u32)) -> bool {
        let e = &self.entries[w as usize];
        e.alive && p <= e.len && self.verts[e.v_off + p as usize] as usize == x
    }

    /// `(walk, first position)` for every live walk containing `x`, compacting stale entries.
    pub fn walks_through(&mut self, x: usize) -> Vec<(WalkId, u32)> {
        let mut list = std::mem::take(&mut self.by_vertex[x]);
        list.retain(|&en| self.valid_vertex_entry(x, en));
        let out = list.clone();
        self.by_vertex[x] = list;
        out
    }

    /// Walks whose stored edges include `e`.
    pub fn walks_on_edge(&mut self, e: EdgeId) -> Vec<(WalkId, u32)> {
        let Some(list) = self.by_edge.get_mut(e.0) else { return Vec::new() };
        let mut list = std::mem::take(list);
        list.retain(|&(w, i)| {
            let en = &self.entries[w as usize];
            en.alive && i < en.len && self.edges[en.e_off + i as usize] as usize == e.0
        });
        let out = list.clone();
        self.by_edge[e.0] = list;
        out
    }

    /// Cuts every walk at its first visit of the new terminal `u`.
    pub fn shorten_at(&mut self, u: usize, rho: usize) -> Vec<HDelta> {
        let hits = self.walks_through(u);
        if hits.is_empty() {
            return Vec::new();
        }
        let mut affected: Vec<SampleId> = hits.iter().map(|&(w, _)| self.entries[w as usize].sample).collect();
        affected.sort_unstable();
        affected.dedup();
        let old: Vec<Option<HEdge>> = affected.iter().map(|&s| self.h_edge(s, rho)).collect();
        for &(w, p) in &hits {
            let e = &mut self.entries[w as usize];
            if p == e.len && e.status == WalkStatus::ReachedTerminal(u) {
                continue;
            }
            self.shortened_steps += (e.len - p) as u64;
            e.len = p;
            e.status = WalkStatus::ReachedTerminal(u);
        }
        let mut deltas = Vec::new();
        for (i, &s) in affected.iter().enumerate() {
            let new = self.h_edge(s, rho);
            if new != old[i] {
                deltas.push(HDelta { sample: s, old: old[i], new });
            }
        }
        deltas
    }

    /// Removes all samples of edge `e` and returns their former contributions.
    pub fn remove_samples_of(&mut self, e: EdgeId, rho: usize) -> Vec<HDelta> {
        let ids = self.samples_of_edge.get_mut(e.0).map(std::mem::take).unwrap_or_default();
        let mut out = Vec::new();
        for s in ids {
            let old = self.h_edge(s, rho);
            let sample = &mut self.samples[s as usize];
            if !sample.alive {
                continue;
            }
            sample.alive = false;
            for h in sample.halves {
                self.entries[h as usize].alive = false;
            }
            self.live_samples -= 1;
            if old.is_some() {
                out.push(HDelta { sample: s, old, new: None });
            }
        }
        out
    }

    /// One line per live walk: `id status v0 v1 ...`.
    pub fn dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for w in self.walks() {
            write!(out, "{} {}", w.id, w.status)?;
            for v in w.vertices {
                write!(out, " {v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightMode;
    use crate::rng::{stream, Domain};
    use proptest::prelude::*;
    use rand::Rng as _;

    fn path(n: usize) -> MultiGraph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        MultiGraph::from_edges(n, WeightMode::Unweighted, &edges).unwrap()
    }

    fn big_caps() -> WalkCaps {
        WalkCaps { distinct: usize::MAX, steps: u64::MAX }
    }

    #[test]
    fn caps_follow_the_formulas() {
        let c = WalkParams::default().caps(0.5, 100);
        let ln = 100f64.ln();
        assert_eq!(c.distinct, (2.0 * ln / 0.5).ceil() as usize);
        assert_eq!(c.steps, (16.0 * ln.powi(3) / 0.25).ceil() as u64);
    }

    #[test]
    fn path_walk_reaches_endpoint_terminals() {
        let g = path(6);
        let t = TerminalSet::from_slice(6, &[0, 5]);
        let mut marks = Marks::default();
        for seed in 0..50 {
            let mut rng = stream(seed, Domain::Test, &[]);
            let w = generate_walk(&g, 2, &t, big_caps(), 5, &mut rng, &mut marks);
            let end = w.vertices[w.vertices.len() - 1];
            assert!(end == 0 || end == 5);
            assert_eq!(w.status, WalkStatus::ReachedTerminal(end));
            for (i, e) in w.edges.iter().enumerate() {
                let ed = g.edge(*e).unwrap();
                assert_eq!(ed.other(w.vertices[i]), w.vertices[i + 1]);
            }
            // Only the last vertex is a terminal.
            assert!(w.vertices[..w.len()].iter().all(|&v| !t.contains(v)));
        }
    }

    #[test]
    fn terminal_start_gives_empty_walk() {
        let g = path(3);
        let t = TerminalSet::from_slice(3, &[1]);
        let mut rng = stream(0, Domain::Test, &[]);
        let w = generate_walk(&g, 1, &t, big_caps(), 2, &mut rng, &mut Marks::default());
        assert!(w.is_empty());
        assert_eq!(w.status, WalkStatus::ReachedTerminal(1));
    }

    #[test]
    fn terminal_free_component_is_covered() {
        let g = path(4);
        let t = TerminalSet::new(4);
        let mut rng = stream(3, Domain::Test, &[]);
        let w = generate_walk(&g, 1, &t, big_caps(), 3, &mut rng, &mut Marks::default());
        assert_eq!(w.status, WalkStatus::CoveredComponent);
        let mut seen: Vec<_> = w.edges.clone();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 3);
    }

    #[test]
    fn distinct_cap_truncates() {
        let g = path(40);
        let t = TerminalSet::from_slice(40, &[0, 39]);
        let caps = WalkCaps { distinct: 3, steps: u64::MAX };
        let mut rng = stream(5, Domain::Test, &[]);
        let w = generate_walk(&g, 20, &t, caps, 39, &mut rng, &mut Marks::default());
        assert_eq!(w.status, WalkStatus::Truncated);
        let mut seen: Vec<_> = w.edges.clone();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 3);
    }

    #[test]
    fn hitting_frequencies_on_a_path() {
        // From vertex 1 of a 5-vertex path with terminals at the ends, the walk
        // exits at 4 with probability 1/4.
        let g = path(5);
        let t = TerminalSet::from_slice(5, &[0, 4]);
        let mut marks = Marks::default();
        let mut rng = stream(9, Domain::Test, &[]);
        let trials = 40_000;
        let far = (0..trials)
            .filter(|_| generate_walk(&g, 1, &t, big_caps(), 4, &mut rng, &mut marks).status == WalkStatus::ReachedTerminal(4))
            .count();
        assert!((far as f64 / trials as f64 - 0.25).abs() < 0.01);
    }

    #[test]
    fn sample_weight_uses_combined_length() {
        let mut st = WalkStore::new(6);
        let w0 = Walk { vertices: vec![2, 1, 0], edges: vec![EdgeId(1), EdgeId(0)], costs: None, status: WalkStatus::ReachedTerminal(0) };
        let w1 = Walk { vertices: vec![3, 4], edges: vec![EdgeId(3)], costs: None, status: WalkStatus::ReachedTerminal(4) };
        let s = st.add_sample(EdgeId(2), 1.0, [w0, w1]);
        let h = st.h_edge(s, 4).unwrap();
        assert_eq!((h.a, h.b), (0, 4));
        assert_eq!(h.w, 1.0 / (4.0 * 4.0));
    }

    #[test]
    fn shortening_cuts_at_first_occurrence() {
        let mut st = WalkStore::new(6);
        let w0 = Walk {
            vertices: vec![2, 1, 2, 1, 0],
            edges: vec![EdgeId(1), EdgeId(1), EdgeId(1), EdgeId(0)],
            costs: None,
            status: WalkStatus::ReachedTerminal(0),
        };
        let s = st.add_sample(EdgeId(2), 1.0, [w0, Walk::trivial(3)]);
        let before = st.h_edge(s, 1).unwrap();
        assert_eq!(before.w, 1.0 / 5.0);
        let d = st.shorten_at(1, 1);
        assert_eq!(d.len(), 1);
        let after = d[0].new.unwrap();
        assert_eq!((after.a, after.b, after.w), (1, 3, 0.5));
        assert_eq!(st.walk(0).vertices, &[2, 1]);
        assert_eq!(st.shortened_steps, 3);
        // The stale entry for vertex 0 disappears on read.
        assert!(st.walks_through(0).is_empty());
        assert_eq!(st.walks_through(2), vec![(0, 0)]);
        // Already ending at 1: nothing changes.
        assert!(st.shorten_at(1, 1).is_empty());
    }

    #[test]
    fn dump_lists_live_walks() {
        let mut st = WalkStore::new(4);
        st.add_sample(EdgeId(0), 1.0, [Walk::trivial(0), Walk::trivial(1)]);
        let mut buf = Vec::new();
        st.dump(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0 terminal:0 0\n1 terminal:1 1\n");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn index_agrees_with_full_scan(seed in 0u64..10_000, cuts in proptest::collection::vec(0usize..12, 1..6)) {
            let n = 12;
            let mut rng = stream(seed, Domain::Test, &[1]);
            let mut g = MultiGraph::unweighted(n);
            for u in 0..n { for v in u + 1..n { if rng.random::<f64>() < 0.3 { g.insert_edge(u, v, 1.0).unwrap(); } } }
            let comps = g.components();
            let mut t = TerminalSet::from_slice(n, &[0]);
            let mut st = WalkStore::new(n);
            let mut marks = Marks::default();
            let caps = WalkCaps { distinct: 8, steps: 200 };
            let edges: Vec<_> = g.edges().map(|(id, e)| (id, e.u, e.v)).collect();
            for (id, u, v) in edges {
                let ce = comps.edge_count[comps.of_vertex[u]];
                let a = generate_walk(&g, u, &t, caps, ce, &mut rng, &mut marks);
                let b = generate_walk(&g, v, &t, caps, ce, &mut rng, &mut marks);
                st.add_sample(id, 1.0, [a, b]);
            }
            for c in cuts {
                if t.insert(c) { st.shorten_at(c, 3); }
                for x in 0..n {
                    let mut scan = Vec::new();
                    for w in st.walks() {
                        if let Some(p) = w.vertices.iter().position(|&y| y as usize == x) {
                            scan.push((w.id, p as u32));
                        }
                    }
                    let mut idx = st.walks_through(x);
                    idx.sort_unstable();
                    prop_assert_eq!(idx, scan);
                }
                for w in st.walks() {
                    // Terminals appear only as the final vertex.
                    for &y in &w.vertices[..w.len()] { prop_assert!(!t.contains(y as usize)); }
                    if let WalkStatus::ReachedTerminal(x) = w.status { prop_assert_eq!(w.last(), x); }
                }
            }
        }
    }
}
