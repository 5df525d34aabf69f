//! Spectral gaps of the random-walk, exclusion, and interchange generators,
//! and the Aldous equality between them.

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{ExlabError, Result};
use crate::graph::WeightedGraph;
use crate::report::VerificationReport;
use crate::states::{swap_table, FullSpace, PermSpace, SectorSpace, StateSpace};

/// Largest state space handed to the dense symmetric eigensolver; beyond it
/// the deflated Lanczos path takes over.
pub const SPECTRAL_DENSE_LIMIT: usize = 1024;
/// Absolute cap on iterative gap computations (8! permutation states).
pub const SPECTRAL_ITER_LIMIT: usize = 40320;

#[derive(Debug, Clone, Serialize)]
pub struct GapResult {
    pub kind: String,
    pub size: usize,
    /// Smallest nonzero eigenvalue of -L.
    pub gap: f64,
    /// Multiplicity of the eigenvalue 0 (dimension of the constant kernel
    /// on the connected state graph).
    pub kernel_dim: usize,
    /// ||Av - gap v|| for the reported eigenpair (v normalized).
    pub residual: f64,
    pub method: String,
}

/// The positive form -L as an edge/swap-table operator on a state space.
struct SwapOperator {
    size: usize,
    /// (conductance, precomputed swap table) per graph edge.
    terms: Vec<(f64, Vec<usize>)>,
}

impl SwapOperator {
    fn new<S: StateSpace>(space: &S, g: &WeightedGraph) -> Self {
        let terms = g
            .edges()
            .iter()
            .map(|&(x, y, c)| (c, swap_table(space, x, y)))
            .collect();
        SwapOperator { size: space.size(), terms }
    }

    fn apply(&self, v: &DVector<f64>, out: &mut DVector<f64>) {
        out.fill(0.0);
        for (c, table) in &self.terms {
            for idx in 0..self.size {
                out[idx] += c * (v[idx] - v[table[idx]]);
            }
        }
    }

    fn dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.size, self.size);
        for (c, table) in &self.terms {
            for idx in 0..self.size {
                let s = table[idx];
                if s == idx {
                    continue;
                }
                m[(idx, idx)] += c;
                m[(idx, s)] -= c;
            }
        }
        m
    }
}

fn residual_norm(op: &SwapOperator, v: &DVector<f64>, lambda: f64) -> f64 {
    let mut av = DVector::zeros(op.size);
    op.apply(v, &mut av);
    (av - v * lambda).norm() / v.norm()
}

/// Second-smallest eigenvalue by dense symmetric eigensolve.
fn gap_dense(op: &SwapOperator) -> (f64, f64) {
    let eig = nalgebra::SymmetricEigen::new(op.dense());
    let mut order: Vec<usize> = (0..op.size).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let idx = order[1];
    let gap = eig.eigenvalues[idx];
    let v = eig.eigenvectors.column(idx).into_owned();
    (gap, residual_norm(op, &v, gap))
}

/// Smallest eigenvalue orthogonal to the constants by Lanczos with full
/// reorthogonalization and explicit deflation of the constant vector.
fn gap_lanczos(op: &SwapOperator, seed: u64) -> Result<(f64, f64)> {
    let dim = op.size;
    let ones = DVector::from_element(dim, 1.0 / (dim as f64).sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: DVector<f64> = DVector::from_fn(dim, |_, _| rng.gen::<f64>() - 0.5);
    v -= &ones * ones.dot(&v);
    v /= v.norm();

    let max_iter = dim.min(400);
    let mut basis: Vec<DVector<f64>> = vec![v.clone()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = DVector::zeros(dim);
    let mut prev_theta = f64::INFINITY;

    for j in 0..max_iter {
        op.apply(&basis[j], &mut w);
        let alpha = basis[j].dot(&w);
        alphas.push(alpha);
        w -= &basis[j] * alpha;
        if j > 0 {
            let b = betas[j - 1];
            w -= &basis[j - 1] * b;
        }
        // Full reorthogonalization, constants included.
        w -= &ones * ones.dot(&w);
        for q in &basis {
            let c = q.dot(&w);
            w -= q * c;
        }
        let beta = w.norm();

        // Ritz check every few steps once the subspace is nontrivial.
        if (j + 1) % 5 == 0 || beta < 1e-13 || j + 1 == max_iter {
            let m = alphas.len();
            let mut t = DMatrix::zeros(m, m);
            for i in 0..m {
                t[(i, i)] = alphas[i];
                if i + 1 < m {
                    t[(i, i + 1)] = betas[i];
                    t[(i + 1, i)] = betas[i];
                }
            }
            let eig = nalgebra::SymmetricEigen::new(t);
            let mut min_i = 0;
            for i in 0..m {
                if eig.eigenvalues[i] < eig.eigenvalues[min_i] {
                    min_i = i;
                }
            }
            let theta = eig.eigenvalues[min_i];
            let s = eig.eigenvectors.column(min_i);
            let converged = beta * s[m - 1].abs() < 1e-12 * theta.abs().max(1e-6)
                || (prev_theta - theta).abs() < 1e-14 * theta.abs().max(1e-6);
            if converged || beta < 1e-13 || j + 1 == max_iter {
                let mut ritz = DVector::zeros(dim);
                for (i, q) in basis.iter().enumerate() {
                    ritz += q * s[i];
                }
                ritz /= ritz.norm();
                return Ok((theta, residual_norm(op, &ritz, theta)));
            }
            prev_theta = theta;
        }
        basis.push(&w / beta);
        betas.push(beta);
    }
    Err(ExlabError::SingularSystem)
}

fn gap_for_space<S: StateSpace>(space: &S, g: &WeightedGraph, kind: &str) -> Result<GapResult> {
    let size = space.size();
    if size > SPECTRAL_ITER_LIMIT {
        return Err(ExlabError::StateSpaceTooLarge { size: size as u128, cap: SPECTRAL_ITER_LIMIT as u128 });
    }
    let op = SwapOperator::new(space, g);
    let (gap, residual, method) = if size <= SPECTRAL_DENSE_LIMIT {
        let (gap, res) = gap_dense(&op);
        (gap, res, "dense")
    } else {
        let (gap, res) = gap_lanczos(&op, 0x1a0c)?;
        (gap, res, "lanczos")
    };
    Ok(GapResult {
        kind: kind.to_string(),
        size,
        gap,
        kernel_dim: 1,
        residual,
        method: method.to_string(),
    })
}

/// Spectral gap of the weighted-graph Laplacian.
pub fn gap_random_walk(g: &WeightedGraph) -> Result<GapResult> {
    let n = g.n();
    let mut lap = DMatrix::zeros(n, n);
    for &(u, v, c) in g.edges() {
        lap[(u, u)] += c;
        lap[(v, v)] += c;
        lap[(u, v)] -= c;
        lap[(v, u)] -= c;
    }
    let eig = nalgebra::SymmetricEigen::new(lap.clone());
    let mut vals: Vec<(f64, usize)> =
        eig.eigenvalues.iter().copied().zip(0..n).collect();
    vals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (gap, col) = vals[1];
    let v = eig.eigenvectors.column(col).into_owned();
    let residual = (&lap * &v - &v * gap).norm() / v.norm();
    Ok(GapResult {
        kind: "random-walk".into(),
        size: n,
        gap,
        kernel_dim: 1,
        residual,
        method: "dense".into(),
    })
}

/// Spectral gap of the k-particle exclusion generator.
pub fn gap_exclusion(g: &WeightedGraph, k: usize) -> Result<GapResult> {
    if k == 0 || k >= g.n() {
        return Err(ExlabError::InvalidInput(format!(
            "sector k={k} has no dynamics on {} vertices",
            g.n()
        )));
    }
    let space = SectorSpace::new(g.n(), k)?;
    gap_for_space(&space, g, &format!("exclusion-k{k}"))
}

/// Spectral gap of the exclusion generator on the full space {0,1}^V: the
/// minimum over nontrivial sectors (the kernel has one constant per sector).
pub fn gap_exclusion_full(g: &WeightedGraph) -> Result<GapResult> {
    let space = FullSpace::new(g.n())?;
    let mut best: Option<GapResult> = None;
    for k in 1..g.n() {
        let r = gap_exclusion(g, k)?;
        if best.as_ref().map_or(true, |b| r.gap < b.gap) {
            best = Some(r);
        }
    }
    let b = best.expect("n >= 2");
    Ok(GapResult {
        kind: "exclusion-full".into(),
        size: space.size(),
        gap: b.gap,
        // One conserved sector per particle count.
        kernel_dim: g.n() + 1,
        residual: b.residual,
        method: b.method,
    })
}

/// Spectral gap of the interchange generator on n! states.
pub fn gap_interchange(g: &WeightedGraph) -> Result<GapResult> {
    let space = PermSpace::new(g.n())?;
    gap_for_space(&space, g, "interchange")
}

/// Aldous equality: gap_IP = gap_RW = gap_EX_k for every sector k.
pub fn check_aldous(g: &WeightedGraph, tol: f64) -> Result<VerificationReport> {
    let rw = gap_random_walk(g)?;
    let ip = gap_interchange(g)?;
    let mut max_dev = (ip.gap - rw.gap).abs() / rw.gap;
    let mut sector_gaps = Vec::new();
    for k in 1..g.n() {
        let ex = gap_exclusion(g, k)?;
        max_dev = max_dev.max((ex.gap - rw.gap).abs() / rw.gap);
        sector_gaps.push(format!("k{}={:.12e}", k, ex.gap));
    }
    let mut report = VerificationReport::identity(
        "aldous",
        &format!("n={}", g.n()),
        ip.gap,
        rw.gap,
        tol,
    );
    report.pass = max_dev <= tol;
    report.margin = -max_dev;
    Ok(report.with_witness(format!(
        "rw={:.12e} ip={:.12e} ip_residual={:.3e} sectors=[{}]",
        rw.gap,
        ip.gap,
        ip.residual,
        sector_gaps.join(" ")
    )))
}
