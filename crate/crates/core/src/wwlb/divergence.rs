use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{cholesky_jitter, log_det};
use crate::model::{GaussianKernel, KernelSet};

/// Chernoff exponent `κ(s) = −ln ∫ f_a^s f_b^{1−s}` for Gaussian kernels.
pub fn chernoff_exponent(a: &GaussianKernel, b: &GaussianKernel, s: f64) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch("kernels have different dimensions".into()));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidScenario(format!("Chernoff parameter {s} must lie in (0,1)")));
    }
    if a.dim() == 0 {
        return Ok(0.0);
    }
    let qs = a.cov() * s + b.cov() * (1.0 - s);
    let cs = cholesky_jitter(&qs).ok_or(Error::SingularCovariance)?;
    let ca = cholesky_jitter(a.cov()).ok_or(Error::SingularCovariance)?;
    let cb = cholesky_jitter(b.cov()).ok_or(Error::SingularCovariance)?;
    let dm = a.mean() - b.mean();
    let quad = dm.dot(&cs.solve(&dm));
    let ld = log_det(&cs) - s * log_det(&ca) - (1.0 - s) * log_det(&cb);
    Ok(0.5 * ld + 0.5 * s * (1.0 - s) * quad)
}

/// Bhattacharyya coefficient `ξ = ∫ √(f_a f_b)`.
pub fn bhattacharyya(a: &GaussianKernel, b: &GaussianKernel) -> Result<f64> {
    if a == b {
        return Ok(1.0);
    }
    Ok((-chernoff_exponent(a, b, 0.5)?).exp().min(1.0))
}

/// Matrix of pairwise Bhattacharyya coefficients between the states of one control.
pub fn xi_matrix(kernels: &KernelSet) -> Result<DMatrix<f64>> {
    let n = kernels.n();
    let mut m = DMatrix::from_element(n, n, 1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = bhattacharyya(kernels.kernel(i), kernels.kernel(j))?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}
