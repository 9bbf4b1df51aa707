use nalgebra::{DMatrix, DVector};

use super::control::Allocation;
use super::kernel::GaussianKernel;
use crate::error::{Error, Result};

/// One physical sensor producing AR(1)-correlated samples per state.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorSpec {
    pub name: String,
    pub mu: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub phi: f64,
    pub sigma_z2: f64,
    pub delta: f64,
}

impl SensorSpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.mu.len() != n || self.sigma2.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "sensor '{}' needs {n} per-state means and variances",
                self.name
            )));
        }
        if !(self.phi.abs() < 1.0) {
            return Err(Error::InvalidAr(self.phi));
        }
        if self.sigma2.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidVariance(format!("sensor '{}' sigma2", self.name)));
        }
        if !(self.sigma_z2 >= 0.0) || !self.sigma_z2.is_finite() {
            return Err(Error::InvalidVariance(format!("sensor '{}' sigma_z2", self.name)));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::InvalidScenario(format!("sensor '{}' delta must be positive", self.name)));
        }
        if self.mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidScenario(format!("sensor '{}' mean is not finite", self.name)));
        }
        Ok(())
    }

    /// Covariance block for `count` consecutive samples in `state`.
    pub fn block(&self, state: usize, count: usize) -> DMatrix<f64> {
        let scale = self.sigma2[state] / (1.0 - self.phi * self.phi);
        DMatrix::from_fn(count, count, |r, c| {
            let lag = r.abs_diff(c) as i32;
            let v = scale * self.phi.powi(lag);
            if r == c {
                v + self.sigma_z2
            } else {
                v
            }
        })
    }
}

/// Per-state kernels for an allocation: stacked repeated means, block-diagonal AR covariances.
pub fn build_observation_model(sensors: &[SensorSpec], allocation: &Allocation) -> Result<Vec<GaussianKernel>> {
    if allocation.len() != sensors.len() {
        return Err(Error::DimensionMismatch(format!(
            "allocation has {} entries for {} sensors",
            allocation.len(),
            sensors.len()
        )));
    }
    let n = sensors.first().map(|s| s.mu.len()).ok_or_else(|| {
        Error::InvalidScenario("no sensors".into())
    })?;
    let d: usize = allocation.iter().sum();
    (0..n)
        .map(|state| {
            let mut mean = DVector::zeros(d);
            let mut cov = DMatrix::zeros(d, d);
            let mut off = 0;
            for (s, &count) in sensors.iter().zip(allocation) {
                if count == 0 {
                    continue;
                }
                mean.rows_mut(off, count).fill(s.mu[state]);
                cov.view_mut((off, off), (count, count)).copy_from(&s.block(state, count));
                off += count;
            }
            GaussianKernel::new(mean, cov)
        })
        .collect()
}

/// Normalized sensing cost `allocationᵀδ / C`.
pub fn sensing_cost(allocation: &Allocation, deltas: &[f64], normalizer: f64) -> Result<f64> {
    if allocation.len() != deltas.len() {
        return Err(Error::DimensionMismatch("allocation and delta lengths differ".into()));
    }
    if !(normalizer > 0.0) {
        return Err(Error::InvalidScenario(format!("normalizer {normalizer} must be positive")));
    }
    let c = energy(allocation, deltas) / normalizer;
    if !(0.0..=1.0 + 1e-12).contains(&c) {
        return Err(Error::CostOutOfRange(c));
    }
    Ok(c.min(1.0))
}

/// Raw energy `allocationᵀδ`.
pub fn energy(allocation: &Allocation, deltas: &[f64]) -> f64 {
    allocation.iter().zip(deltas).map(|(&n, &d)| n as f64 * d).sum()
}
