//! Kalman-like approximate MMSE filter and the exact Bayes belief recursion.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_jitter, outer_cov};
use crate::model::{KernelSet, MarkovChain};

const ENTRY_TOL: f64 = 1e-12;
const SUM_TOL: f64 = 1e-9;

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief(DVector<f64>);

impl Belief {
    /// Validate, clamp tiny negatives and renormalize.
    pub fn new(probs: DVector<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidBelief("empty vector".into()));
        }
        if probs.iter().any(|v| !v.is_finite() || *v < -ENTRY_TOL) {
            return Err(Error::InvalidBelief(format!("entry outside [0,1]: {:?}", probs.as_slice())));
        }
        let s = probs.sum();
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidBelief(format!("entries sum to {s}")));
        }
        Ok(Self::renormalized(probs))
    }

    pub fn from_slice(p: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(p))
    }

    fn renormalized(mut probs: DVector<f64>) -> Self {
        probs.iter_mut().for_each(|v| *v = v.max(0.0));
        let s = probs.sum();
        probs /= s;
        Self(probs)
    }

    /// Wrap a vector already known to lie on the simplex.
    pub(crate) fn from_vector_unchecked(probs: DVector<f64>) -> Self {
        Self(probs)
    }

    pub fn uniform(n: usize) -> Self {
        Self(DVector::from_element(n, 1.0 / n as f64))
    }

    /// Unit vector `e_i`.
    pub fn point(n: usize, i: usize) -> Self {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        Self(v)
    }

    /// Two-state belief `(p, 1 − p)`.
    pub fn two_state(p: f64) -> Self {
        Self(DVector::from_vec(vec![p, 1.0 - p]))
    }

    pub fn probs(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    /// Index of the largest entry, ties to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for i in 1..self.0.len() {
            if self.0[i] > self.0[best] {
                best = i;
            }
        }
        best
    }

    /// `1 − ‖p‖²`, the trace of the error covariance.
    pub fn trace_mse(&self) -> f64 {
        1.0 - self.0.norm_squared()
    }
}

/// Quantities produced by one Kalman-like correction.
#[derive(Debug, Clone)]
pub struct FilterState {
    pub posterior: Belief,
    pub prediction: Belief,
    pub pred_cov: DMatrix<f64>,
    pub post_cov: DMatrix<f64>,
    pub gain: DMatrix<f64>,
    pub pred_obs: DVector<f64>,
    pub mix_cov: DMatrix<f64>,
    /// L1 distance between the raw update and the clamped, renormalized posterior.
    pub correction: f64,
}

/// Gain and covariance terms of the Kalman-like update at a prediction.
#[derive(Debug, Clone)]
pub struct GainTerms {
    pub sigma: DMatrix<f64>,
    pub pred_obs: DVector<f64>,
    pub mix_cov: DMatrix<f64>,
    pub gain: DMatrix<f64>,
}

/// `Σ = diag(p) − ppᵀ`, `ŷ = Mp`, `Q̃ = Σ p_i Q_i`, `G = ΣMᵀ(MΣMᵀ + Q̃)⁻¹`.
pub fn gain_terms(p: &DVector<f64>, kernels: &KernelSet) -> Result<GainTerms> {
    let n = p.len();
    if kernels.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "belief has {n} states but the control defines {} kernels",
            kernels.n()
        )));
    }
    let d = kernels.dim();
    let sigma = outer_cov(p);
    let m = kernels.means();
    let pred_obs = m * p;
    let mut mix_cov = DMatrix::zeros(d, d);
    for (i, k) in kernels.kernels().iter().enumerate() {
        if p[i] != 0.0 {
            mix_cov += k.cov() * p[i];
        }
    }
    if d == 0 {
        return Ok(GainTerms { sigma, pred_obs, mix_cov, gain: DMatrix::zeros(n, 0) });
    }
    let b = m * &sigma;
    let s = &b * m.transpose() + &mix_cov;
    let s = (&s + s.transpose()) * 0.5;
    let chol = cholesky_jitter(&s).ok_or(Error::SingularInnovation)?;
    let x = chol.solve(&b);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularInnovation);
    }
    Ok(GainTerms { sigma, pred_obs, mix_cov, gain: x.transpose() })
}

/// One-step prediction `P p`.
pub fn predict(chain: &MarkovChain, posterior: &Belief) -> Belief {
    Belief(chain.predict(posterior.probs()))
}

/// Kalman-like correction of a prediction with observation `y`.
pub fn kalman_update(prediction: &Belief, kernels: &KernelSet, y: &DVector<f64>) -> Result<FilterState> {
    if y.len() != kernels.dim() {
        return Err(Error::DimensionMismatch(format!(
            "observation has length {} but control dimension is {}",
            y.len(),
            kernels.dim()
        )));
    }
    let p = prediction.probs();
    let t = gain_terms(p, kernels)?;
    let raw = p + &t.gain * (y - &t.pred_obs);
    let posterior = Belief::renormalized(raw.clone());
    let correction = (posterior.probs() - &raw).abs().sum();
    let post_cov = outer_cov(posterior.probs());
    Ok(FilterState {
        posterior,
        prediction: prediction.clone(),
        pred_cov: t.sigma,
        post_cov,
        gain: t.gain,
        pred_obs: t.pred_obs,
        mix_cov: t.mix_cov,
        correction,
    })
}

/// Exact Bayes correction `r p / 1ᵀ r p`, computed in log space.
pub fn bayes_correct(prediction: &Belief, kernels: &KernelSet, y: &DVector<f64>) -> Result<Belief> {
    let ll = kernels.log_likelihoods(y)?;
    let p = prediction.probs();
    if ll.len() != p.len() {
        return Err(Error::DimensionMismatch("kernel count differs from state count".into()));
    }
    let terms: Vec<f64> = p
        .iter()
        .zip(&ll)
        .map(|(&pi, &l)| if pi > 0.0 { pi.ln() + l } else { f64::NEG_INFINITY })
        .collect();
    let mx = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY || mx.is_nan() {
        return Err(Error::ZeroEvidence);
    }
    let w = DVector::from_iterator(terms.len(), terms.iter().map(|t| (t - mx).exp()));
    let s = w.sum();
    Ok(Belief(w / s))
}

/// Next predicted belief `Φ(p,u,y) = P r p / 1ᵀ r p`.
pub fn bayes_update(chain: &MarkovChain, prediction: &Belief, kernels: &KernelSet, y: &DVector<f64>) -> Result<Belief> {
    let post = bayes_correct(prediction, kernels, y)?;
    Ok(predict(chain, &post))
}

/// Error covariance `diag(p) − ppᵀ`.
pub fn error_covariance(belief: &Belief) -> DMatrix<f64> {
    outer_cov(belief.probs())
}
