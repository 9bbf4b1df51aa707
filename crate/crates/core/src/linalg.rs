//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Diagonal jitter used when a symmetric matrix fails to factor.
pub const JITTER: f64 = 1e-10;

/// Cholesky factorization with a single jitter retry.
pub fn cholesky_jitter(a: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(a.clone()) {
        if well_conditioned(&c) {
            return Some(c);
        }
    }
    let n = a.nrows();
    let jittered = a + DMatrix::identity(n, n) * JITTER;
    Cholesky::new(jittered)
}

fn well_conditioned(c: &Cholesky<f64, Dyn>) -> bool {
    let l = c.l_dirty();
    let n = l.nrows();
    if n == 0 {
        return true;
    }
    let mut max_d: f64 = 0.0;
    let mut min_d = f64::INFINITY;
    for i in 0..n {
        let d = l[(i, i)] * l[(i, i)];
        max_d = max_d.max(d);
        min_d = min_d.min(d);
    }
    min_d.is_finite() && min_d > 1e-15 * max_d.max(1.0)
}

/// log det of the factored matrix.
pub fn log_det(c: &Cholesky<f64, Dyn>) -> f64 {
    let l = c.l_dirty();
    (0..l.nrows()).map(|i| 2.0 * l[(i, i)].ln()).sum()
}

/// Symmetric difference check: max |a_ij − a_ji|.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// Smallest eigenvalue of a symmetric matrix (0 for an empty matrix).
pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    let sym = (a + a.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

/// diag(p) − p pᵀ.
pub fn outer_cov(p: &DVector<f64>) -> DMatrix<f64> {
    let n = p.len();
    let mut s = -(p * p.transpose());
    for i in 0..n {
        s[(i, i)] += p[i];
    }
    s
}
