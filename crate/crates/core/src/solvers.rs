//! Conjugate gradient for SPD systems, dense symmetric eigendecomposition and
//! Lanczos estimation of the bottom of the spectrum.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

pub const DENSE_EIG_CAP: usize = 4000;

/// A symmetric linear operator on `R^n`.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn diagonal(&self) -> Vec<f64>;
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        CsrMatrix::dim(self)
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec_into(x, y)
    }
    fn diagonal(&self) -> Vec<f64> {
        CsrMatrix::diagonal(self)
    }
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
    fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows()).map(|i| self[(i, i)]).collect()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Preconditioner {
    None,
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CgConfig {
    pub rel_tol: f64,
    /// Defaults to `10 n` when unset.
    pub max_iter: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl Default for CgConfig {
    fn default() -> Self {
        CgConfig {
            rel_tol: 1e-10,
            max_iter: None,
            preconditioner: Preconditioner::Jacobi,
        }
    }
}

impl CgConfig {
    pub fn with_tol(rel_tol: f64) -> Self {
        CgConfig {
            rel_tol,
            ..CgConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter("rel_tol must be positive".into()));
        }
        if self.max_iter == Some(0) {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub rel_residual: f64,
}

/// Solves `A x = b` for symmetric positive definite `A`.
///
/// Fails with `NotSpd` on non-positive curvature and with `MaxIterExceeded`
/// (carrying the last iterate) when the residual target is not met.
pub fn cg_solve<A: LinearOperator + ?Sized>(a: &A, b: &[f64], cfg: &CgConfig) -> Result<CgSolution> {
    cfg.validate()?;
    let n = a.dim();
    if b.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(CgSolution {
            x: vec![0.0; n],
            iterations: 0,
            rel_residual: 0.0,
        });
    }
    let inv_diag = match cfg.preconditioner {
        Preconditioner::None => None,
        Preconditioner::Jacobi => {
            let d = a.diagonal();
            if let Some(&bad) = d.iter().find(|&&v| !(v > 0.0)) {
                return Err(Error::NotSpd { curvature: bad });
            }
            Some(d.iter().map(|v| 1.0 / v).collect::<Vec<_>>())
        }
    };
    let precondition = |r: &[f64], z: &mut [f64]| match &inv_diag {
        Some(inv) => z.iter_mut().zip(r).zip(inv).for_each(|((z, r), d)| *z = r * d),
        None => z.copy_from_slice(r),
    };
    let max_iter = cfg.max_iter.unwrap_or(10 * n.max(1));
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut rel = 1.0;
    for it in 1..=max_iter {
        a.apply(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if !(curvature > 0.0) {
            return Err(Error::NotSpd { curvature });
        }
        let alpha = rz / curvature;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = norm(&r) / b_norm;
        if rel <= cfg.rel_tol {
            return Ok(CgSolution {
                x,
                iterations: it,
                rel_residual: rel,
            });
        }
        precondition(&r, &mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::MaxIterExceeded {
        iterations: max_iter,
        rel_residual: rel,
        best: x,
    })
}

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i).iter().copied().collect()
    }

    /// `max_i |A v_i - λ_i v_i|`.
    pub fn max_residual(&self, a: &DMatrix<f64>) -> f64 {
        let av = a * &self.eigenvectors;
        (0..self.dim())
            .map(|i| (av.column(i) - self.eigenvectors.column(i) * self.eigenvalues[i]).norm())
            .fold(0.0, f64::max)
    }

    /// `max |V^T V - I|` entrywise.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.eigenvectors.transpose() * &self.eigenvectors;
        let n = self.dim();
        (g - DMatrix::<f64>::identity(n, n)).amax()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut scaled = self.eigenvectors.clone();
        for (i, &l) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(i).scale_mut(l);
        }
        scaled * self.eigenvectors.transpose()
    }
}

/// Full eigendecomposition of a symmetric matrix.
pub fn dense_eig(a: &DMatrix<f64>) -> Result<SpectralDecomposition> {
    let n = a.nrows();
    if n > DENSE_EIG_CAP {
        return Err(Error::DimensionCap {
            n,
            cap: DENSE_EIG_CAP,
        });
    }
    if a.ncols() != n {
        return Err(Error::InvalidParameter("matrix must be square".into()));
    }
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LanczosEstimate {
    pub value: f64,
    pub iterations: usize,
    /// Number of invariant-subspace breakdowns that forced a fresh start vector.
    pub restarts: usize,
    /// `β_k |s_k|`: the Ritz residual of the reported value.
    pub residual_bound: f64,
}

/// Sturm count: the number of eigenvalues of the tridiagonal `(alpha, beta)` below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..alpha.len() {
        let off = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] };
        q = alpha[i] - x - if i == 0 { 0.0 } else { off / q };
        if q == 0.0 {
            q = f64::EPSILON * (alpha[i].abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn tridiagonal_min(alpha: &[f64], beta: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..alpha.len() {
        let left = if i > 0 { beta[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < alpha.len() { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - left - right);
        hi = hi.max(alpha[i] + left + right);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Lanczos iteration with full reorthogonalization for the smallest
/// eigenvalue of a symmetric operator. Deterministic for a fixed seed; the
/// returned Ritz value is never below the true minimum.
pub fn lanczos_smallest<A: LinearOperator + ?Sized>(
    a: &A,
    iters: usize,
    seed: u64,
) -> Result<LanczosEstimate> {
    if iters < 10 {
        return Err(Error::InvalidParameter("lanczos needs at least 10 iterations".into()));
    }
    let n = a.dim();
    if n == 0 {
        return Err(Error::InvalidParameter("empty operator".into()));
    }
    let steps = iters.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    let mut restarts = 0;
    let mut q = fresh_direction(&mut rng, n, &basis).ok_or(Error::SingularMatrix)?;
    let mut w = vec![0.0; n];
    let mut history: Vec<f64> = Vec::new();
    let mut scale = 0.0f64;
    let mut last_beta = 0.0;
    for j in 0..steps {
        a.apply(&q, &mut w);
        let a_j = dot(&q, &w);
        alpha.push(a_j);
        basis.push(q.clone());
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= c * vi);
            }
        }
        let b_j = norm(&w);
        scale = scale.max(a_j.abs() + b_j);
        last_beta = b_j;
        if (j + 1) % 10 == 0 || j + 1 == steps {
            let theta = tridiagonal_min(&alpha, &beta);
            history.push(theta);
            let k = history.len();
            if k >= 3 {
                let tol = 1e-14 * scale.max(1.0);
                if (history[k - 1] - history[k - 2]).abs() <= tol
                    && (history[k - 2] - history[k - 3]).abs() <= tol
                {
                    break;
                }
            }
        }
        if j + 1 == steps {
            break;
        }
        if b_j <= 1e-12 * scale.max(1.0) {
            match fresh_direction(&mut rng, n, &basis) {
                Some(next) => {
                    restarts += 1;
                    beta.push(0.0);
                    q = next;
                    continue;
                }
                None => {
                    last_beta = 0.0;
                    break;
                }
            }
        }
        beta.push(b_j);
        q = w.iter().map(|v| v / b_j).collect();
    }
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (imin, value) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty tridiagonal");
    let residual_bound = last_beta * eig.eigenvectors[(k - 1, imin)].abs();
    Ok(LanczosEstimate {
        value,
        iterations: k,
        restarts,
        residual_bound,
    })
}

fn fresh_direction(rng: &mut ChaCha8Rng, n: usize, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    for _ in 0..8 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        for _ in 0..2 {
            for b in basis {
                let c = dot(b, &v);
                v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= c * bi);
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            return Some(v.iter().map(|x| x / nv).collect());
        }
    }
    None
}
