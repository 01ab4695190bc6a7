//! Exact dense reference computations and the iterative Laplacian solver.
//!
//! Everything here is `O(n^3)` and meant for verification and for the small
//! terminal-side systems. Pseudoinverses drop eigenvalues below
//! `1e-10 * lambda_max`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::MultiGraph;

const PINV_CUTOFF: f64 = 1e-10;
const RANGE_TOL: f64 = 1e-8;

pub fn laplacian(g: &MultiGraph) -> DMatrix<f64> {
    let n = g.n();
    let mut l = DMatrix::zeros(n, n);
    for (_, e) in g.edges() {
        l[(e.u, e.u)] += e.w;
        l[(e.v, e.v)] += e.w;
        l[(e.u, e.v)] -= e.w;
        l[(e.v, e.u)] -= e.w;
    }
    l
}

/// Laplacian of a weighted edge list on `n` vertices.
pub fn laplacian_from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(n, n);
    for (u, v, w) in edges {
        if u == v {
            continue;
        }
        l[(u, u)] += w;
        l[(v, v)] += w;
        l[(u, v)] -= w;
        l[(v, u)] -= w;
    }
    l
}

pub fn pinv(l: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(l.clone());
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
    let cut = PINV_CUTOFF * lmax;
    let n = l.nrows();
    let mut out = DMatrix::zeros(n, n);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > cut {
            let v = eig.eigenvectors.column(k);
            out += (v * v.transpose()) / lam;
        }
    }
    out
}

/// Component labels induced by the off-diagonal support of a Laplacian.
pub fn matrix_components(l: &DMatrix<f64>) -> Vec<usize> {
    let n = l.nrows();
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = next;
        stack.push(s);
        while let Some(x) = stack.pop() {
            for y in 0..n {
                if y != x && l[(x, y)] != 0.0 && comp[y] == usize::MAX {
                    comp[y] = next;
                    stack.push(y);
                }
            }
        }
        next += 1;
    }
    comp
}

/// Checks that `b` sums to zero on every component and returns the worst imbalance.
pub fn range_imbalance(comp: &[usize], b: &[f64]) -> f64 {
    let k = comp.iter().copied().max().map_or(0, |c| c + 1);
    let mut sums = vec![0.0; k];
    for (i, &c) in comp.iter().enumerate() {
        sums[c] += b[i];
    }
    sums.iter().fold(0.0f64, |a, s| a.max(s.abs()))
}

fn check_range(comp: &[usize], b: &[f64]) -> Result<()> {
    let scale: f64 = b.iter().map(|x| x.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    let imb = range_imbalance(comp, b);
    if imb > RANGE_TOL * scale.max(1.0) {
        return Err(Error::NotInRange(imb));
    }
    Ok(())
}

fn submatrix(l: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| l[(rows[i], cols[j])])
}

/// Non-terminal vertices split into those whose component has a terminal and
/// those whose component has none.
fn split_free(l: &DMatrix<f64>, terminals: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let n = l.nrows();
    let comp = matrix_components(l);
    let mut is_t = vec![false; n];
    let mut comp_has_t = vec![false; n];
    for &t in terminals {
        is_t[t] = true;
        comp_has_t[comp[t]] = true;
    }
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for v in 0..n {
        if is_t[v] {
            continue;
        }
        if comp_has_t[comp[v]] {
            kept.push(v);
        } else {
            dropped.push(v);
        }
    }
    (kept, dropped)
}

#[derive(Clone, Debug)]
pub struct SchurComplement {
    /// Rows and columns follow the order of `terminals`.
    pub matrix: DMatrix<f64>,
    pub terminals: Vec<usize>,
    /// Non-terminals in components without any terminal; they are eliminated trivially.
    pub dropped: Vec<usize>,
}

pub fn exact_schur(l: &DMatrix<f64>, terminals: &[usize]) -> Result<SchurComplement> {
    let (free, dropped) = split_free(l, terminals);
    let ltt = submatrix(l, terminals, terminals);
    let matrix = if free.is_empty() {
        ltt
    } else {
        let lff = submatrix(l, &free, &free);
        let lft = submatrix(l, &free, terminals);
        let chol = Cholesky::new(lff).ok_or(Error::SingularBlock)?;
        let x = chol.solve(&lft);
        ltt - lft.transpose() * x
    };
    Ok(SchurComplement { matrix, terminals: terminals.to_vec(), dropped })
}

/// `|T| x n` matrix whose column `v` is the distribution of the first terminal
/// hit by a walk from `v`. Columns of vertices in terminal-free components are zero.
pub fn exact_projection(l: &DMatrix<f64>, terminals: &[usize]) -> Result<DMatrix<f64>> {
    let n = l.nrows();
    let (free, _) = split_free(l, terminals);
    let mut p = DMatrix::zeros(terminals.len(), n);
    for (i, &t) in terminals.iter().enumerate() {
        p[(i, t)] = 1.0;
    }
    if !free.is_empty() {
        let lff = submatrix(l, &free, &free);
        let lft = submatrix(l, &free, terminals);
        let chol = Cholesky::new(lff).ok_or(Error::SingularBlock)?;
        let h = -chol.solve(&lft);
        for (j, &f) in free.iter().enumerate() {
            for i in 0..terminals.len() {
                p[(i, f)] = h[(j, i)];
            }
        }
    }
    Ok(p)
}

/// Hitting distribution over `terminals` for a walk started at `u`, computed
/// from the transition matrix of `g` by an LU solve.
pub fn hitting_probabilities(g: &MultiGraph, terminals: &[usize], u: usize) -> Result<Vec<f64>> {
    let n = g.n();
    if u >= n {
        return Err(Error::VertexOutOfRange { vertex: u, n });
    }
    if let Some(i) = terminals.iter().position(|&t| t == u) {
        let mut out = vec![0.0; terminals.len()];
        out[i] = 1.0;
        return Ok(out);
    }
    let comps = g.components();
    let c = comps.of_vertex[u];
    let mut t_index = vec![usize::MAX; n];
    for (i, &t) in terminals.iter().enumerate() {
        t_index[t] = i;
    }
    let free: Vec<usize> = (0..n).filter(|&v| comps.of_vertex[v] == c && t_index[v] == usize::MAX).collect();
    if !terminals.iter().any(|&t| comps.of_vertex[t] == c) {
        return Ok(vec![0.0; terminals.len()]);
    }
    let mut f_index = vec![usize::MAX; n];
    for (i, &f) in free.iter().enumerate() {
        f_index[f] = i;
    }
    let k = free.len();
    let mut a = DMatrix::<f64>::identity(k, k);
    let mut rhs = DMatrix::<f64>::zeros(k, terminals.len());
    for (i, &x) in free.iter().enumerate() {
        let d = g.weighted_degree(x);
        for &(y, id) in g.neighbors(x) {
            let p = g.edge(id).expect("live").w / d;
            if f_index[y] != usize::MAX {
                a[(i, f_index[y])] -= p;
            } else {
                rhs[(i, t_index[y])] += p;
            }
        }
    }
    let h = a.lu().solve(&rhs).ok_or(Error::SingularBlock)?;
    Ok((0..terminals.len()).map(|j| h[(f_index[u], j)]).collect())
}

/// Effective resistance by grounding `v` and solving on the component of `u`.
pub fn exact_er(l: &DMatrix<f64>, u: usize, v: usize) -> Result<f64> {
    let n = l.nrows();
    for x in [u, v] {
        if x >= n {
            return Err(Error::VertexOutOfRange { vertex: x, n });
        }
    }
    if u == v {
        return Ok(0.0);
    }
    let comp = matrix_components(l);
    if comp[u] != comp[v] {
        return Err(Error::Disconnected(u, v));
    }
    let rest: Vec<usize> = (0..n).filter(|&x| comp[x] == comp[u] && x != v).collect();
    let lr = submatrix(l, &rest, &rest);
    let chol = Cholesky::new(lr).ok_or(Error::SingularBlock)?;
    let iu = rest.iter().position(|&x| x == u).expect("u in component");
    let mut e = DVector::zeros(rest.len());
    e[iu] = 1.0;
    Ok(chol.solve(&e)[iu])
}

/// Pseudoinverse cached for repeated resistance queries on a fixed Laplacian.
pub struct ResistanceOracle {
    pinv: DMatrix<f64>,
    comp: Vec<usize>,
}

impl ResistanceOracle {
    pub fn new(l: &DMatrix<f64>) -> Self {
        ResistanceOracle { pinv: pinv(l), comp: matrix_components(l) }
    }

    pub fn er(&self, u: usize, v: usize) -> Result<f64> {
        if u == v {
            return Ok(0.0);
        }
        if self.comp[u] != self.comp[v] {
            return Err(Error::Disconnected(u, v));
        }
        Ok(self.pinv[(u, u)] + self.pinv[(v, v)] - 2.0 * self.pinv[(u, v)])
    }
}

/// `b^T L^+ b`.
pub fn exact_energy(l: &DMatrix<f64>, b: &[f64]) -> Result<f64> {
    check_range(&matrix_components(l), b)?;
    let bv = DVector::from_column_slice(b);
    Ok(bv.dot(&(pinv(l) * &bv)))
}

/// `L^+ b`, the minimum-norm exact solution.
pub fn exact_solve(l: &DMatrix<f64>, b: &[f64]) -> Result<DVector<f64>> {
    check_range(&matrix_components(l), b)?;
    Ok(pinv(l) * DVector::from_column_slice(b))
}

/// `x^T L x`.
pub fn l_norm_sq(l: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    x.dot(&(l * x))
}

/// `sum_v d(v) * Pr[walk from v is at u after t steps]`, which equals `d(u)`
/// by reversibility. Isolated vertices stay put.
pub fn position_degree_sum(g: &MultiGraph, u: usize, t: usize) -> f64 {
    let n = g.n();
    let mut p = DMatrix::<f64>::zeros(n, n);
    for x in 0..n {
        let d = g.weighted_degree(x);
        if d == 0.0 {
            p[(x, x)] = 1.0;
            continue;
        }
        for &(y, e) in g.neighbors(x) {
            p[(x, y)] += g.edge(e).expect("live").w / d;
        }
    }
    // Column u of P^t.
    let mut col = DVector::<f64>::zeros(n);
    col[u] = 1.0;
    for _ in 0..t {
        col = &p * col;
    }
    (0..n).map(|v| g.weighted_degree(v) * col[v]).sum()
}

#[derive(Clone, Debug)]
pub struct SpectralCertificate {
    pub epsilon: f64,
    pub ok: bool,
    /// Extreme generalized eigenvalues of `L_H` relative to `L_G` on the range of `L_G`.
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Present when the check failed.
    pub witness: Option<DVector<f64>>,
}

/// Decides `(1-eps) L_G <= L_H <= (1+eps) L_G` exactly.
pub fn check_spectral(lg: &DMatrix<f64>, lh: &DMatrix<f64>, epsilon: f64) -> SpectralCertificate {
    let eig = SymmetricEigen::new(lg.clone());
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let cut = PINV_CUTOFF * lmax.max(f64::MIN_POSITIVE);
    let n = lg.nrows();
    let pos: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > cut).collect();
    let null: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] <= cut).collect();

    let scale = lmax.max(lh.amax());
    if !null.is_empty() {
        let v0 = eig.eigenvectors.select_columns(&null);
        let nm = v0.transpose() * lh * &v0;
        let ne = SymmetricEigen::new(nm);
        let (k, top) = ne.eigenvalues.iter().cloned().enumerate().fold((0, f64::MIN), |a, (i, x)| if x > a.1 { (i, x) } else { a });
        if top > 1e-8 * scale.max(1e-300) {
            let w = &v0 * ne.eigenvectors.column(k);
            return SpectralCertificate { epsilon, ok: false, lambda_min: 1.0, lambda_max: f64::INFINITY, witness: Some(w) };
        }
    }
    if pos.is_empty() {
        return SpectralCertificate { epsilon, ok: true, lambda_min: 1.0, lambda_max: 1.0, witness: None };
    }
    let vp = eig.eigenvectors.select_columns(&pos);
    let inv_sqrt = DVector::from_iterator(pos.len(), pos.iter().map(|&k| 1.0 / eig.eigenvalues[k].sqrt()));
    let scaled = &vp * DMatrix::from_diagonal(&inv_sqrt);
    let m = scaled.transpose() * lh * &scaled;
    let me = SymmetricEigen::new((&m + m.transpose()) * 0.5);
    let (mut imin, mut imax) = (0, 0);
    for k in 0..me.eigenvalues.len() {
        if me.eigenvalues[k] < me.eigenvalues[imin] {
            imin = k;
        }
        if me.eigenvalues[k] > me.eigenvalues[imax] {
            imax = k;
        }
    }
    let lambda_min = me.eigenvalues[imin];
    let lambda_max = me.eigenvalues[imax];
    let low_bad = lambda_min < 1.0 - epsilon;
    let high_bad = lambda_max > 1.0 + epsilon;
    let ok = !low_bad && !high_bad;
    let witness = if ok {
        None
    } else {
        let k = if low_bad && (!high_bad || 1.0 - lambda_min > lambda_max - 1.0) { imin } else { imax };
        Some(&scaled * me.eigenvectors.column(k))
    };
    SpectralCertificate { epsilon, ok, lambda_min, lambda_max, witness }
}

/// Symmetric operator interface used by the iterative solver.
pub trait LaplacianOp {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn diagonal(&self) -> Vec<f64>;
    /// Component label of each coordinate.
    fn components(&self) -> Vec<usize>;
    /// Smallest positive off-diagonal weight.
    fn min_weight(&self) -> f64;
}

impl LaplacianOp for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.nrows();
        for (i, yi) in y.iter_mut().enumerate().take(n) {
            *yi = (0..n).map(|j| self[(i, j)] * x[j]).sum();
        }
    }
    fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows()).map(|i| self[(i, i)]).collect()
    }
    fn components(&self) -> Vec<usize> {
        matrix_components(self)
    }
    fn min_weight(&self) -> f64 {
        let n = self.nrows();
        let mut w = f64::INFINITY;
        for i in 0..n {
            for j in 0..n {
                if i != j && self[(i, j)] < 0.0 {
                    w = w.min(-self[(i, j)]);
                }
            }
        }
        w
    }
}

/// Compressed sparse Laplacian with parallel edges merged.
#[derive(Clone, Debug)]
pub struct SparseLaplacian {
    diag: Vec<f64>,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
}

impl SparseLaplacian {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut diag = vec![0.0; n];
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        for (u, v, w) in edges {
            if u == v {
                continue;
            }
            entries.push((u, v, w));
            entries.push((v, u, w));
            diag[u] += w;
            diag[v] += w;
        }
        entries.sort_unstable_by_key(|e| (e.0, e.1));
        let mut row_start = vec![0; n + 1];
        let mut cols: Vec<usize> = Vec::with_capacity(entries.len());
        let mut weights: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last = None;
        for (u, v, w) in entries {
            if last == Some((u, v)) {
                *weights.last_mut().expect("merged entry") += w;
                continue;
            }
            last = Some((u, v));
            cols.push(v);
            weights.push(w);
            row_start[u + 1] = cols.len();
        }
        for i in 1..=n {
            row_start[i] = row_start[i].max(row_start[i - 1]);
        }
        SparseLaplacian { diag, row_start, cols, weights }
    }

    pub fn from_graph(g: &MultiGraph) -> Self {
        Self::from_edges(g.n(), g.edges().map(|(_, e)| (e.u, e.v, e.w)))
    }
}

impl LaplacianOp for SparseLaplacian {
    fn dim(&self) -> usize {
        self.diag.len()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.diag.len() {
            let mut s = self.diag[i] * x[i];
            for k in self.row_start[i]..self.row_start[i + 1] {
                s -= self.weights[k] * x[self.cols[k]];
            }
            y[i] = s;
        }
    }
    fn diagonal(&self) -> Vec<f64> {
        self.diag.clone()
    }
    fn components(&self) -> Vec<usize> {
        let n = self.diag.len();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            stack.push(s);
            while let Some(x) = stack.pop() {
                for k in self.row_start[x]..self.row_start[x + 1] {
                    let y = self.cols[k];
                    if comp[y] == usize::MAX {
                        comp[y] = next;
                        stack.push(y);
                    }
                }
            }
            next += 1;
        }
        comp
    }
    fn min_weight(&self) -> f64 {
        self.weights.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradient returning `x` with
/// `||x - L^+ b||_L <= eps * ||L^+ b||_L`.
///
/// The residual target `eps * sqrt(lambda_2 / lambda_max)` uses the bounds
/// `lambda_max <= 2 d_max` and `lambda_2 >= 4 w_min / n^2`.
pub fn solve_lap<L: LaplacianOp + ?Sized>(l: &L, b: &[f64], epsilon: f64) -> Result<DVector<f64>> {
    let n = l.dim();
    if b.len() != n {
        return Err(Error::InvalidParameter(format!("demand has length {} but the operator has dimension {n}", b.len())));
    }
    let comp = l.components();
    check_range(&comp, b)?;
    // Remove the tolerated imbalance so the system is exactly consistent.
    let k = comp.iter().copied().max().map_or(0, |c| c + 1);
    let mut sums = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for (i, &c) in comp.iter().enumerate() {
        sums[c] += b[i];
        counts[c] += 1;
    }
    let rhs: Vec<f64> = (0..n).map(|i| b[i] - sums[comp[i]] / counts[comp[i]] as f64).collect();

    let bnorm = dot(&rhs, &rhs).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(DVector::from_vec(x));
    }
    let diag = l.diagonal();
    let dmax = diag.iter().cloned().fold(0.0f64, f64::max);
    let wmin = l.min_weight();
    let nn = n as f64;
    let tol = (epsilon * (4.0 * wmin / (nn * nn * 2.0 * dmax)).sqrt()).max(1e-14);
    let minv: Vec<f64> = diag.iter().map(|&d| if d > 0.0 { 1.0 / d } else { 0.0 }).collect();

    let mut r = rhs.clone();
    let mut z: Vec<f64> = r.iter().zip(&minv).map(|(a, m)| a * m).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let cap = 20 * n.max(1);
    let mut rel = 1.0;
    for _ in 0..cap {
        l.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = dot(&r, &r).sqrt() / bnorm;
        if rel <= tol {
            return Ok(DVector::from_vec(x));
        }
        for i in 0..n {
            z[i] = r[i] * minv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    // Recheck with a true residual before giving up.
    l.apply(&x, &mut ap);
    let true_rel = (0..n).map(|i| (rhs[i] - ap[i]).powi(2)).sum::<f64>().sqrt() / bnorm;
    if true_rel <= tol {
        return Ok(DVector::from_vec(x));
    }
    Err(Error::NoConvergence { iterations: cap, residual: rel.min(true_rel) })
}
