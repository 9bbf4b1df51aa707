use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{asymmetry, cholesky_jitter, log_det, min_eigenvalue};

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const SYM_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-12;

/// Multivariate Gaussian observation kernel `N(mean, cov)`.
///
/// Factorizations are computed once at construction: a Cholesky factor of the
/// (jittered if needed) covariance for densities and a square-root factor for sampling.
#[derive(Debug, Clone)]
pub struct GaussianKernel {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    chol_l: DMatrix<f64>,
    log_det: f64,
    sample_factor: DMatrix<f64>,
}

impl PartialEq for GaussianKernel {
    fn eq(&self, other: &Self) -> bool {
        self.mean == other.mean && self.cov == other.cov
    }
}

impl GaussianKernel {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "mean has length {d} but covariance is {}x{}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NotPsd("non-finite entry".into()));
        }
        if d == 0 {
            return Ok(Self {
                mean,
                cov,
                chol_l: DMatrix::zeros(0, 0),
                log_det: 0.0,
                sample_factor: DMatrix::zeros(0, 0),
            });
        }
        let scale = cov.amax().max(1.0);
        if asymmetry(&cov) > SYM_TOL * scale {
            return Err(Error::NotPsd("covariance is not symmetric".into()));
        }
        let cov = (&cov + cov.transpose()) * 0.5;
        let lam_min = min_eigenvalue(&cov);
        if lam_min < -PSD_TOL * scale {
            return Err(Error::NotPsd(format!("minimum eigenvalue {lam_min:e}")));
        }
        let chol = cholesky_jitter(&cov).ok_or(Error::SingularCovariance)?;
        let log_det = log_det(&chol);
        let chol_l = chol.l();
        let sample_factor = match nalgebra::Cholesky::new(cov.clone()) {
            Some(c) => c.l(),
            None => {
                let eig = cov.clone().symmetric_eigen();
                let mut v = eig.eigenvectors.clone();
                for (j, &lam) in eig.eigenvalues.iter().enumerate() {
                    let s = lam.max(0.0).sqrt();
                    v.column_mut(j).scale_mut(s);
                }
                v
            }
        };
        Ok(Self { mean, cov, chol_l, log_det, sample_factor })
    }

    /// Scalar kernel `N(mean, var)`.
    pub fn scalar(mean: f64, var: f64) -> Result<Self> {
        if !(var >= 0.0) {
            return Err(Error::InvalidVariance(format!("variance {var}")));
        }
        Self::new(DVector::from_element(1, mean), DMatrix::from_element(1, 1, var))
    }

    /// Zero-dimensional kernel, likelihood-neutral.
    pub fn empty() -> Self {
        Self::new(DVector::zeros(0), DMatrix::zeros(0, 0)).expect("empty kernel")
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Square-root factor `F` with `F Fᵀ = cov`.
    pub fn sample_factor(&self) -> &DMatrix<f64> {
        &self.sample_factor
    }

    /// Log density at `y`; 0 for a zero-dimensional kernel.
    pub fn log_likelihood(&self, y: &DVector<f64>) -> Result<f64> {
        let d = self.dim();
        if y.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "observation has length {} but kernel dimension is {d}",
                y.len()
            )));
        }
        Ok(self.log_likelihood_slice(y.as_slice()))
    }

    /// Log density without dimension checks.
    pub fn log_likelihood_slice(&self, y: &[f64]) -> f64 {
        let d = self.dim();
        if d == 0 {
            return 0.0;
        }
        let mut z = [0.0f64; 64];
        let mut heap;
        let buf: &mut [f64] = if d <= 64 {
            &mut z[..d]
        } else {
            heap = vec![0.0; d];
            &mut heap[..]
        };
        let mut quad = 0.0;
        for i in 0..d {
            let mut s = y[i] - self.mean[i];
            for (j, bj) in buf.iter().enumerate().take(i) {
                s -= self.chol_l[(i, j)] * bj;
            }
            let v = s / self.chol_l[(i, i)];
            buf[i] = v;
            quad += v * v;
        }
        -0.5 * (d as f64 * LN_2PI + self.log_det + quad)
    }

    /// Density at `y`.
    pub fn likelihood(&self, y: &DVector<f64>) -> Result<f64> {
        Ok(self.log_likelihood(y)?.exp())
    }

    /// Draw `mean + F z` with `z` standard normal.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let d = self.dim();
        let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.mean + &self.sample_factor * z
    }
}

/// Kernels of one control across all states, with the stacked mean matrix `M = [m_1 … m_n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSet {
    kernels: Vec<GaussianKernel>,
    means: DMatrix<f64>,
}

impl KernelSet {
    pub fn new(kernels: Vec<GaussianKernel>) -> Result<Self> {
        if kernels.is_empty() {
            return Err(Error::DimensionMismatch("kernel set is empty".into()));
        }
        let d = kernels[0].dim();
        if kernels.iter().any(|k| k.dim() != d) {
            return Err(Error::DimensionMismatch(
                "kernels sharing a control must have equal dimension".into(),
            ));
        }
        let n = kernels.len();
        let means = DMatrix::from_fn(d, n, |r, c| kernels[c].mean()[r]);
        Ok(Self { kernels, means })
    }

    pub fn dim(&self) -> usize {
        self.means.nrows()
    }

    pub fn n(&self) -> usize {
        self.kernels.len()
    }

    pub fn kernels(&self) -> &[GaussianKernel] {
        &self.kernels
    }

    pub fn kernel(&self, state: usize) -> &GaussianKernel {
        &self.kernels[state]
    }

    pub fn means(&self) -> &DMatrix<f64> {
        &self.means
    }

    /// Per-state log densities at `y`.
    pub fn log_likelihoods(&self, y: &DVector<f64>) -> Result<Vec<f64>> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "observation has length {} but control dimension is {}",
                y.len(),
                self.dim()
            )));
        }
        Ok(self.kernels.iter().map(|k| k.log_likelihood_slice(y.as_slice())).collect())
    }
}
