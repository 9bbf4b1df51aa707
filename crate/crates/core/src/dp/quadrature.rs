use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::KernelSet;

/// Quadrature settings for the expected future cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub scalar_order: usize,
    pub vector_samples: usize,
    pub seed: u64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { scalar_order: 64, vector_samples: 4096, seed: 0 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.scalar_order < 8 {
            return Err(Error::InvalidQuadrature(format!("scalar_order {} < 8", self.scalar_order)));
        }
        if self.vector_samples < 256 {
            return Err(Error::InvalidQuadrature(format!("vector_samples {} < 256", self.vector_samples)));
        }
        Ok(())
    }
}

/// Gauss–Hermite nodes and weights for the standard normal density (weights sum to one).
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jac = DMatrix::zeros(order, order);
    for k in 1..order {
        let b = (k as f64).sqrt();
        jac[(k, k - 1)] = b;
        jac[(k - 1, k)] = b;
    }
    let eig = jac.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..order)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    (pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1 / total).collect())
}

fn primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut c = 2u64;
    while out.len() < count {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| !c.is_multiple_of(p)) {
            out.push(c);
        }
        c += 1;
    }
    out
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Randomly shifted Halton points mapped to standard normals, `samples × dim`.
pub fn qmc_normals(samples: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let bases = primes(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    (0..samples)
        .map(|s| {
            (0..dim)
                .map(|j| {
                    let u = (radical_inverse(s as u64 + 1, bases[j]) + shift[j]).fract();
                    normal.inverse_cdf(u.clamp(f64::EPSILON, 1.0 - f64::EPSILON))
                })
                .collect()
        })
        .collect()
}

/// Discrete observation channel of one control: node weights `C[node][j]` with
/// `Σ_node C[node][j] = 1` for every state `j`.
///
/// Nodes are drawn per mixture component (Gauss–Hermite for scalar observations, shifted
/// Halton for vectors) and importance-weighted against the equal-weight mixture, so the
/// expectation under the predictive mixture for belief `p` is `Σ_node (Σ_j C[node][j] p_j) g(node)`.
#[derive(Debug, Clone)]
pub struct ObservationChannel {
    n: usize,
    weights: Vec<f64>,
}

impl ObservationChannel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> usize {
        self.weights.len() / self.n
    }

    /// Weights of node `k` across states.
    #[inline]
    pub fn node(&self, k: usize) -> &[f64] {
        &self.weights[k * self.n..(k + 1) * self.n]
    }
}

/// Build the channel for a control.
pub fn build_channel(kernels: &KernelSet, quad: &QuadratureSpec) -> Result<ObservationChannel> {
    quad.validate()?;
    let n = kernels.n();
    let d = kernels.dim();
    if d == 0 {
        return Ok(ObservationChannel { n, weights: vec![1.0; n] });
    }
    let (zs, ws): (Vec<Vec<f64>>, Vec<f64>) = if d == 1 {
        let (z, w) = gauss_hermite(quad.scalar_order);
        (z.into_iter().map(|v| vec![v]).collect(), w)
    } else {
        let z = qmc_normals(quad.vector_samples, d, quad.seed);
        let w = vec![1.0 / quad.vector_samples as f64; quad.vector_samples];
        (z, w)
    };
    let mut weights = Vec::with_capacity(n * n * zs.len());
    let mut y = vec![0.0; d];
    let mut ll = vec![0.0; n];
    for comp in kernels.kernels() {
        let f = comp.sample_factor();
        for (z, &w) in zs.iter().zip(&ws) {
            for r in 0..d {
                let mut v = comp.mean()[r];
                for (c, zc) in z.iter().enumerate() {
                    v += f[(r, c)] * zc;
                }
                y[r] = v;
            }
            for (j, k) in kernels.kernels().iter().enumerate() {
                ll[j] = k.log_likelihood_slice(&y);
            }
            let mx = ll.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !mx.is_finite() {
                return Err(Error::QuadratureUnstable("node likelihoods all underflow".into()));
            }
            let total: f64 = ll.iter().map(|l| (l - mx).exp()).sum();
            for l in &ll {
                weights.push(w * (l - mx).exp() / total);
            }
        }
    }
    let mut mass = vec![0.0; n];
    for node in weights.chunks(n) {
        for j in 0..n {
            mass[j] += node[j];
        }
    }
    if mass.iter().any(|m| !(*m > 0.0) || !m.is_finite()) {
        return Err(Error::QuadratureUnstable(format!("component masses {mass:?}")));
    }
    for node in weights.chunks_mut(n) {
        for j in 0..n {
            node[j] /= mass[j];
        }
    }
    Ok(ObservationChannel { n, weights })
}
