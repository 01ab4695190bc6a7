//! Bucketed distributions of walk resistance.
//!
//! A `BucketedPmf` with precision `j` assigns mass to buckets
//! `I_k^j = [(1+e)^k, (1+e)^(k+j))`. The invariant is that every walk whose
//! mass sits in bucket `k` has total resistance inside `I_k^j`. Convolution
//! adds lower endpoints and rounds into a width-1 bucket, so precision grows
//! by one per level of the halving recursion. Bucket indices may be negative
//! because resistances `1/w` are at most 1.
//!
//! Walk kernels are substochastic: transitions are `w_uv / d(u)` with `d` the
//! degree in the ambient graph, so restricting a kernel to a vertex subset
//! gives the law of walks confined to it.

use std::collections::BTreeMap;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::MultiGraph;
use crate::rng::Rng;

const MASS_FLOOR: f64 = 1e-15;

/// Bucket geometry for one base `1 + eps0`.
#[derive(Clone, Debug)]
pub struct BucketGrid {
    eps0: f64,
    ln_base: f64,
    // offsets[d] = floor(log_base(1 + base^-d)); zero past the end.
    offsets: Vec<i64>,
}

impl BucketGrid {
    pub fn new(eps0: f64) -> Self {
        assert!(eps0 > 0.0 && eps0 < 1.0, "bucket base must lie in (1, 2)");
        let ln_base = eps0.ln_1p();
        let len = ((1.0 / eps0).ln() / ln_base).ceil() as usize + 2;
        let offsets = (0..len)
            .map(|d| {
                let target = (-(d as f64) * ln_base).exp().ln_1p();
                let mut c = (target / ln_base).floor() as i64;
                while c > 0 && (c as f64) * ln_base > target {
                    c -= 1;
                }
                while ((c + 1) as f64) * ln_base <= target {
                    c += 1;
                }
                c
            })
            .collect();
        BucketGrid { eps0, ln_base, offsets }
    }

    /// Grid for a length-`ell` walk with target relative error `epsilon`.
    pub fn for_walk(epsilon: f64, ell: u64) -> Self {
        Self::new(eps0_for(epsilon, ell))
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    /// `(1 + eps0)^k`.
    pub fn value(&self, k: i64) -> f64 {
        (k as f64 * self.ln_base).exp()
    }

    /// The `k` with `value(k) <= x < value(k + 1)`.
    pub fn bucket_of(&self, x: f64) -> i64 {
        assert!(x > 0.0);
        let mut k = (x.ln() / self.ln_base).floor() as i64;
        while self.value(k) > x {
            k -= 1;
        }
        while self.value(k + 1) <= x {
            k += 1;
        }
        k
    }

    /// Bucket of `value(k1) + value(k2)`.
    #[inline]
    pub fn sum_bucket(&self, k1: i64, k2: i64) -> i64 {
        let (hi, d) = if k1 >= k2 { (k1, k1 - k2) } else { (k2, k2 - k1) };
        hi + self.offsets.get(d as usize).copied().unwrap_or(0)
    }
}

pub fn eps0_for(epsilon: f64, ell: u64) -> f64 {
    epsilon / (4.0 * depth(ell).max(1) as f64)
}

/// `ceil(log2 ell)`, the depth of the halving recursion.
pub fn depth(ell: u64) -> u32 {
    if ell <= 1 {
        0
    } else {
        64 - (ell - 1).leading_zeros()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BucketedPmf {
    pub j: u32,
    // Sorted by bucket index, masses positive.
    entries: Vec<(i64, f64)>,
}

impl BucketedPmf {
    pub fn zero(j: u32) -> Self {
        BucketedPmf { j, entries: Vec::new() }
    }

    pub fn point(grid: &BucketGrid, value: f64) -> Self {
        BucketedPmf { j: 1, entries: vec![(grid.bucket_of(value), 1.0)] }
    }

    pub fn from_buckets(j: u32, buckets: &[(i64, f64)]) -> Self {
        Self::from_unsorted(j, buckets.to_vec())
    }

    fn from_unsorted(j: u32, mut raw: Vec<(i64, f64)>) -> Self {
        raw.sort_unstable_by_key(|e| e.0);
        let mut entries: Vec<(i64, f64)> = Vec::with_capacity(raw.len());
        for (k, m) in raw {
            match entries.last_mut() {
                Some(last) if last.0 == k => last.1 += m,
                _ => entries.push((k, m)),
            }
        }
        entries.retain(|e| e.1 >= MASS_FLOOR);
        BucketedPmf { j, entries }
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Nonzero buckets in increasing order.
    pub fn buckets(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// Draws a bucket by inverse CDF and returns the upper end `(1+eps0)^(k+j)`.
    pub fn sample(&self, grid: &BucketGrid, rng: &mut Rng) -> Option<f64> {
        let total = self.total();
        if !(total > 0.0) {
            return None;
        }
        let x = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = self.entries[self.entries.len() - 1].0;
        for &(k, m) in &self.entries {
            acc += m;
            if x < acc {
                pick = k;
                break;
            }
        }
        Some(grid.value(pick + self.j as i64))
    }
}

/// Distribution of the sum of independent draws from `a` and `b`.
pub fn convolute(a: &BucketedPmf, b: &BucketedPmf, grid: &BucketGrid, j_max: u32) -> Result<BucketedPmf> {
    let j = a.j.max(b.j) + 1;
    if j > j_max {
        return Err(Error::PrecisionExhausted { j, max: j_max });
    }
    let mut raw = Vec::with_capacity(a.entries.len() * b.entries.len());
    for &(k1, ma) in &a.entries {
        for &(k2, mb) in &b.entries {
            raw.push((grid.sum_bucket(k1, k2), ma * mb));
        }
    }
    Ok(BucketedPmf::from_unsorted(j, raw))
}

/// Weighted sum of parts; precision is the largest among them.
pub fn mix(parts: &[(f64, &BucketedPmf)]) -> BucketedPmf {
    let j = parts.iter().map(|(_, p)| p.j).max().unwrap_or(1);
    let raw: Vec<(i64, f64)> =
        parts.iter().filter(|(w, _)| *w > 0.0).flat_map(|(w, p)| p.entries.iter().map(move |&(k, m)| (k, w * m))).collect();
    BucketedPmf::from_unsorted(j, raw)
}

/// One-step kernel on local indices `0..k`.
#[derive(Clone, Debug)]
pub struct WalkKernel {
    /// `out[u]` lists `(v, probability, pmf of the step resistance)`.
    out: Vec<Vec<(usize, f64, BucketedPmf)>>,
}

impl WalkKernel {
    /// Kernel of the whole graph.
    pub fn from_graph(g: &MultiGraph, grid: &BucketGrid) -> Self {
        let all: Vec<usize> = (0..g.n()).collect();
        Self::induced(g, &all, grid)
    }

    /// Walks confined to `vertices`, still normalized by degrees in `g`.
    pub fn induced(g: &MultiGraph, vertices: &[usize], grid: &BucketGrid) -> Self {
        let out = vertices
            .iter()
            .map(|&x| {
                let d = g.weighted_degree(x);
                let mut row = Vec::new();
                if d <= 0.0 {
                    return row;
                }
                for (lv, &y) in vertices.iter().enumerate() {
                    let ids = g.edges_between(x, y);
                    if y == x || ids.is_empty() {
                        continue;
                    }
                    let ws: Vec<f64> = ids.iter().map(|&e| g.edge(e).expect("live").w).collect();
                    let total: f64 = ws.iter().sum();
                    let points: Vec<BucketedPmf> = ws.iter().map(|&w| BucketedPmf::point(grid, 1.0 / w)).collect();
                    let parts: Vec<(f64, &BucketedPmf)> = ws.iter().zip(&points).map(|(&w, p)| (w / total, p)).collect();
                    row.push((lv, total / d, mix(&parts)));
                }
                row
            })
            .collect();
        WalkKernel { out }
    }

    pub fn size(&self) -> usize {
        self.out.len()
    }

    pub fn row(&self, u: usize) -> &[(usize, f64, BucketedPmf)] {
        &self.out[u]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistribEntry {
    /// Probability of being at `v` after exactly `ell` steps from `u`.
    pub p: f64,
    /// Resistance distribution conditioned on that event; total 1 when `p > 0`.
    pub pmf: BucketedPmf,
}

/// Entries for every length in the halving tree of `ell`.
#[derive(Clone, Debug)]
pub struct DistribTable {
    k: usize,
    levels: BTreeMap<u64, Vec<DistribEntry>>,
}

impl DistribTable {
    pub fn get(&self, u: usize, v: usize, ell: u64) -> Option<&DistribEntry> {
        self.levels.get(&ell).map(|lv| &lv[u * self.k + v])
    }

    pub fn lengths(&self) -> impl Iterator<Item = u64> + '_ {
        self.levels.keys().copied()
    }
}

fn halving_lengths(ell: u64) -> Vec<u64> {
    let mut set = std::collections::BTreeSet::new();
    let mut frontier = vec![ell];
    while let Some(l) = frontier.pop() {
        if l == 0 || !set.insert(l) {
            continue;
        }
        if l > 1 {
            frontier.push(l / 2);
            frontier.push(l - l / 2);
        }
    }
    set.into_iter().collect()
}

fn base_level(kernel: &WalkKernel) -> Vec<DistribEntry> {
    let k = kernel.size();
    let mut lv = vec![DistribEntry { p: 0.0, pmf: BucketedPmf::zero(1) }; k * k];
    for u in 0..k {
        for (v, p, pmf) in kernel.row(u) {
            lv[u * k + v] = DistribEntry { p: *p, pmf: pmf.clone() };
        }
    }
    lv
}

fn combine(
    k: usize,
    left: &[DistribEntry],
    right: &[DistribEntry],
    u: usize,
    v: usize,
    grid: &BucketGrid,
    j_max: u32,
) -> Result<DistribEntry> {
    let mut p = 0.0;
    let mut convs = Vec::new();
    let mut j = 1;
    for y in 0..k {
        let a = &left[u * k + y];
        let b = &right[y * k + v];
        if a.p == 0.0 || b.p == 0.0 {
            continue;
        }
        let c = convolute(&a.pmf, &b.pmf, grid, j_max)?;
        j = j.max(c.j);
        let w = a.p * b.p;
        p += w;
        convs.push((w, c));
    }
    if p == 0.0 {
        return Ok(DistribEntry { p: 0.0, pmf: BucketedPmf::zero(j) });
    }
    let parts: Vec<(f64, &BucketedPmf)> = convs.iter().map(|(w, c)| (w / p, c)).collect();
    let mut pmf = mix(&parts);
    pmf.j = j;
    Ok(DistribEntry { p, pmf })
}

fn build_levels(
    kernel: &WalkKernel,
    lengths: &[u64],
    grid: &BucketGrid,
    j_max: u32,
) -> Result<BTreeMap<u64, Vec<DistribEntry>>> {
    let k = kernel.size();
    let mut levels: BTreeMap<u64, Vec<DistribEntry>> = BTreeMap::new();
    for &l in lengths {
        let lv = if l == 1 {
            base_level(kernel)
        } else {
            let (a, b) = (l / 2, l - l / 2);
            let mut lv = Vec::with_capacity(k * k);
            for u in 0..k {
                for v in 0..k {
                    lv.push(combine(k, &levels[&a], &levels[&b], u, v, grid, j_max)?);
                }
            }
            lv
        };
        levels.insert(l, lv);
    }
    Ok(levels)
}

/// Full table for all lengths in the halving tree of `ell >= 1`.
pub fn compute_distrib(kernel: &WalkKernel, ell: u64, grid: &BucketGrid) -> Result<DistribTable> {
    if ell == 0 {
        return Err(Error::InvalidParameter("walk length must be positive".into()));
    }
    let levels = build_levels(kernel, &halving_lengths(ell), grid, depth(ell) + 1)?;
    Ok(DistribTable { k: kernel.size(), levels })
}

/// Demand-driven memo over `(u, v, length)`.
struct Memo<'a> {
    kernel: &'a WalkKernel,
    grid: &'a BucketGrid,
    j_max: u32,
    levels: BTreeMap<u64, Vec<Option<DistribEntry>>>,
}

impl Memo<'_> {
    fn ensure(&mut self, u: usize, v: usize, l: u64) -> Result<()> {
        let k = self.kernel.size();
        if self.levels.get(&l).is_some_and(|lv| lv[u * k + v].is_some()) {
            return Ok(());
        }
        let entry = if l == 1 {
            let (p, pmf) = self
                .kernel
                .row(u)
                .iter()
                .find(|r| r.0 == v)
                .map_or((0.0, BucketedPmf::zero(1)), |r| (r.1, r.2.clone()));
            DistribEntry { p, pmf }
        } else {
            let (a, b) = (l / 2, l - l / 2);
            let mut p = 0.0;
            let mut convs = Vec::new();
            let mut j = 1;
            for y in 0..k {
                self.ensure(u, y, a)?;
                let pa = self.levels[&a][u * k + y].as_ref().expect("memoized").p;
                if pa == 0.0 {
                    continue;
                }
                self.ensure(y, v, b)?;
                let ea = self.levels[&a][u * k + y].as_ref().expect("memoized");
                let eb = self.levels[&b][y * k + v].as_ref().expect("memoized");
                if eb.p == 0.0 {
                    continue;
                }
                let c = convolute(&ea.pmf, &eb.pmf, self.grid, self.j_max)?;
                j = j.max(c.j);
                let w = ea.p * eb.p;
                p += w;
                convs.push((w, c));
            }
            if p == 0.0 {
                DistribEntry { p: 0.0, pmf: BucketedPmf::zero(j) }
            } else {
                let parts: Vec<(f64, &BucketedPmf)> = convs.iter().map(|(w, c)| (w / p, c)).collect();
                let mut pmf = mix(&parts);
                pmf.j = j;
                DistribEntry { p, pmf }
            }
        };
        self.levels.entry(l).or_insert_with(|| vec![None; k * k])[u * k + v] = Some(entry);
        Ok(())
    }
}

/// The single entry `(u, v, ell)`, computing only the sub-entries it depends on.
pub fn compute_entry(kernel: &WalkKernel, u: usize, v: usize, ell: u64, grid: &BucketGrid) -> Result<DistribEntry> {
    if ell == 0 {
        return Err(Error::InvalidParameter("walk length must be positive".into()));
    }
    let mut memo = Memo { kernel, grid, j_max: depth(ell) + 1, levels: BTreeMap::new() };
    memo.ensure(u, v, ell)?;
    let k = kernel.size();
    Ok(memo.levels.get_mut(&ell).expect("top level")[u * k + v].take().expect("computed"))
}

/// Sampler for the resistance of a length-`ell` walk from `u` to `v`.
pub struct WeightSampler {
    grid: BucketGrid,
    entry: Option<DistribEntry>,
}

impl WeightSampler {
    /// `ell = 0` requires `u == v` and always yields 0.
    pub fn new(kernel: &WalkKernel, u: usize, v: usize, ell: u64, epsilon: f64) -> Result<Self> {
        let grid = BucketGrid::for_walk(epsilon, ell);
        if ell == 0 {
            if u != v {
                return Err(Error::Unreachable { u, v, len: 0 });
            }
            return Ok(WeightSampler { grid, entry: None });
        }
        let entry = compute_entry(kernel, u, v, ell, &grid)?;
        if entry.p == 0.0 || entry.pmf.is_empty() {
            return Err(Error::Unreachable { u, v, len: ell });
        }
        Ok(WeightSampler { grid, entry: Some(entry) })
    }

    pub fn entry(&self) -> Option<&DistribEntry> {
        self.entry.as_ref()
    }

    pub fn grid(&self) -> &BucketGrid {
        &self.grid
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        match &self.entry {
            None => 0.0,
            Some(e) => e.pmf.sample(&self.grid, rng).expect("entry has mass"),
        }
    }
}

/// One draw of the resistance of a length-`ell` walk from `u` to `v` in `g`.
pub fn sample_weight(g: &MultiGraph, u: usize, v: usize, ell: u64, epsilon: f64, rng: &mut Rng) -> Result<f64> {
    let grid = BucketGrid::for_walk(epsilon, ell);
    let kernel = WalkKernel::from_graph(g, &grid);
    Ok(WeightSampler::new(&kernel, u, v, ell, epsilon)?.sample(rng))
}
