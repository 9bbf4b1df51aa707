//! Current-cost forms, Case I–IV classification and passive-sensing checks.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::estimator::{gain_terms, Belief};
use crate::model::{KernelSet, ObservationSource, Scenario, SensorSpec};

/// Tolerance for equality of means and variances in case classification.
pub const CASE_TOL: f64 = 1e-12;
/// Required agreement between the two current-cost forms.
pub const DUAL_FORM_TOL: f64 = 1e-10;
/// Points of the grid used to certify "for all p" conditions.
pub const CERT_GRID: usize = 1001;

/// Expected trace MSE after correction, `tr((I − GM)Σ)`.
pub fn mse_term_trace(p: &DVector<f64>, kernels: &KernelSet) -> Result<f64> {
    let t = gain_terms(p, kernels)?;
    let tr_sigma = t.sigma.trace();
    if kernels.dim() == 0 {
        return Ok(tr_sigma);
    }
    let gm = &t.gain * kernels.means();
    let reduced = (&gm * &t.sigma).trace();
    Ok(tr_sigma - reduced)
}

/// Expected trace MSE via `pᵀh` with `h_i = 1 − tr(GᵀG Q_i) − ‖p + G(m_i − ŷ)‖²`.
pub fn mse_term_h(p: &DVector<f64>, kernels: &KernelSet) -> Result<f64> {
    let t = gain_terms(p, kernels)?;
    let g = &t.gain;
    let gtg = g.transpose() * g;
    let mut total = 0.0;
    for (i, k) in kernels.kernels().iter().enumerate() {
        if p[i] == 0.0 {
            continue;
        }
        let tr = gtg.component_mul(k.cov()).sum();
        let shifted = p + g * (k.mean() - &t.pred_obs);
        total += p[i] * (1.0 - tr - shifted.norm_squared());
    }
    Ok(total)
}

/// Current cost `ℓ(p,u) = (1−λ)·MSE + λc`.
///
/// Both forms are evaluated in debug builds and must agree to `1e-10`; the trace form is returned.
pub fn current_cost(prediction: &Belief, kernels: &KernelSet, cost: f64, lambda: f64) -> Result<f64> {
    let p = prediction.probs();
    let trace = mse_term_trace(p, kernels)?;
    if cfg!(debug_assertions) {
        let h = mse_term_h(p, kernels)?;
        debug_assert!(
            (h - trace).abs() <= DUAL_FORM_TOL,
            "current-cost forms disagree: h-form {h}, trace form {trace}"
        );
    }
    Ok((1.0 - lambda) * trace + lambda * cost)
}

/// Current cost of control `u` in a scenario at the scenario's λ.
pub fn scenario_cost(s: &Scenario, prediction: &Belief, u: usize) -> Result<f64> {
    current_cost(prediction, s.kernel_set(u)?, s.control(u)?.cost, s.lambda)
}

/// MSE terms of every control of a sensor-allocation scenario at once.
///
/// Each sensor's mean block is rank one, so `MᵀS⁻¹M = A(I + ΣA)⁻¹` with
/// `A = Σ_l w_l μ_l μ_lᵀ` and `w_l = 1ᵀ Q̃_l⁻¹ 1` from one small Toeplitz solve per sample count.
#[derive(Debug, Clone)]
pub struct AllocationMse {
    sensors: Vec<SensorSpec>,
    allocations: Vec<Vec<usize>>,
    budget: usize,
    n: usize,
}

impl AllocationMse {
    /// `None` for scenarios with explicit controls.
    pub fn new(scenario: &Scenario) -> Option<Self> {
        let ObservationSource::Sensors { sensors, budget, .. } = &scenario.source else { return None };
        let allocations = scenario.controls.iter().map(|c| c.allocation.clone()).collect::<Option<Vec<_>>>()?;
        Some(Self { sensors: sensors.clone(), allocations, budget: *budget, n: scenario.n() })
    }

    pub fn num_controls(&self) -> usize {
        self.allocations.len()
    }

    /// `w[l][N]` for `N = 1..=budget`; `None` where the mixture block is singular.
    fn weights(&self, p: &DVector<f64>) -> Vec<Vec<Option<f64>>> {
        self.sensors
            .iter()
            .map(|s| {
                let a: f64 = (0..self.n).map(|i| p[i] * s.sigma2[i]).sum::<f64>() / (1.0 - s.phi * s.phi);
                let mut w = vec![Some(0.0); self.budget + 1];
                for (count, slot) in w.iter_mut().enumerate().skip(1) {
                    let q = DMatrix::from_fn(count, count, |r, c| {
                        let v = a * s.phi.powi(r.abs_diff(c) as i32);
                        if r == c {
                            v + s.sigma_z2
                        } else {
                            v
                        }
                    });
                    *slot = q.cholesky().map(|ch| ch.solve(&DVector::from_element(count, 1.0)).sum());
                }
                w
            })
            .collect()
    }

    /// MSE term per control id at prediction `p`.
    pub fn mse_terms(&self, p: &DVector<f64>, scenario: &Scenario) -> Result<Vec<f64>> {
        let n = self.n;
        let w = self.weights(p);
        let sigma = DMatrix::from_diagonal(p) - p * p.transpose();
        let tr_sigma = sigma.trace();
        let eye = DMatrix::<f64>::identity(n, n);
        let mus: Vec<DVector<f64>> = self.sensors.iter().map(|s| DVector::from_column_slice(&s.mu)).collect();
        let mut out = Vec::with_capacity(self.allocations.len());
        'control: for (u, alloc) in self.allocations.iter().enumerate() {
            let mut a = DMatrix::<f64>::zeros(n, n);
            for (l, &count) in alloc.iter().enumerate() {
                if count == 0 {
                    continue;
                }
                let Some(wl) = w[l][count] else {
                    out.push(mse_term_trace(p, &scenario.kernels[u])?);
                    continue 'control;
                };
                a.ger(wl, &mus[l], &mus[l], 1.0);
            }
            let x = &eye + &sigma * &a;
            let Some(y) = x.lu().solve(&sigma) else {
                out.push(mse_term_trace(p, &scenario.kernels[u])?);
                continue;
            };
            out.push(tr_sigma - (&sigma * &a * y).trace());
        }
        Ok(out)
    }
}

/// Scalar parameters of a two-state scalar control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarPair {
    pub m1: f64,
    pub m2: f64,
    pub v1: f64,
    pub v2: f64,
}

impl ScalarPair {
    pub fn from_kernels(kernels: &KernelSet) -> Result<Self> {
        if kernels.n() != 2 || kernels.dim() != 1 {
            return Err(Error::NotTwoStateScalar);
        }
        let k = kernels.kernels();
        Ok(Self { m1: k[0].mean()[0], m2: k[1].mean()[0], v1: k[0].cov()[(0, 0)], v2: k[1].cov()[(0, 0)] })
    }

    pub fn a12(&self) -> f64 {
        (self.m1 - self.m2).powi(2)
    }
}

/// Closed-form current cost for two states and scalar kernels, `p` the first-state probability.
pub fn current_cost_2state_scalar(p: f64, pair: ScalarPair, cost: f64, lambda: f64) -> Result<f64> {
    let f = p * (1.0 - p);
    let a12 = pair.a12();
    let num = 2.0 * a12 * f * f;
    let mse = if num == 0.0 {
        2.0 * f
    } else {
        let den = a12 * f + pair.v1 * p + pair.v2 * (1.0 - p);
        if !(den > 0.0) {
            return Err(Error::DegenerateKernel(format!("closed-form denominator {den}")));
        }
        2.0 * f - num / den
    };
    Ok((1.0 - lambda) * mse + lambda * cost)
}

/// Case labels for two-state scalar controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    I,
    II,
    III,
    IV,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseLabel {
    pub variant: Case,
    pub a12: f64,
    pub variances: (f64, f64),
}

/// Classify a two-state scalar control by equality of means and variances.
pub fn classify_case(kernels: &KernelSet) -> Result<CaseLabel> {
    let s = ScalarPair::from_kernels(kernels)?;
    let same_mean = (s.m1 - s.m2).abs() <= CASE_TOL;
    let same_var = (s.v1 - s.v2).abs() <= CASE_TOL;
    let variant = match (same_mean, same_var) {
        (true, true) => Case::I,
        (true, false) => Case::II,
        (false, true) => Case::III,
        (false, false) => Case::IV,
    };
    let a12 = if same_mean { 0.0 } else { s.a12() };
    Ok(CaseLabel { variant, a12, variances: (s.v1, s.v2) })
}

/// Sufficient Blackwell characterizations: `a` is at least as informative as `b`.
pub fn blackwell_dominates(a: &CaseLabel, b: &CaseLabel) -> bool {
    let var_le = a.variances.0 <= b.variances.0 + CASE_TOL && a.variances.1 <= b.variances.1 + CASE_TOL;
    match (a.variant, b.variant) {
        (_, Case::I) => true,
        (Case::I | Case::II, Case::II) => var_le,
        (Case::III, Case::III) => a.a12 >= b.a12 - CASE_TOL && var_le,
        _ => false,
    }
}

/// Evaluation grid `0, 1/1000, …, 1` for two-state certifications.
pub fn cert_grid() -> Vec<f64> {
    (0..CERT_GRID).map(|i| i as f64 / (CERT_GRID - 1) as f64).collect()
}

/// A control that Blackwell-dominates every other and has the smallest ℓ at every grid point.
pub fn passive_optimal(scenario: &Scenario, lambda: f64) -> Result<Option<usize>> {
    if scenario.n() != 2 {
        return Err(Error::NotTwoStateScalar);
    }
    let labels = scenario.kernels.iter().map(classify_case).collect::<Result<Vec<_>>>()?;
    let pairs = scenario.kernels.iter().map(ScalarPair::from_kernels).collect::<Result<Vec<_>>>()?;
    let grid = cert_grid();
    'candidate: for u in 0..scenario.num_controls() {
        for v in 0..scenario.num_controls() {
            if v != u && !blackwell_dominates(&labels[u], &labels[v]) {
                continue 'candidate;
            }
        }
        for &p in &grid {
            let lu = current_cost_2state_scalar(p, pairs[u], scenario.cost(u), lambda)?;
            for (v, pair) in pairs.iter().enumerate() {
                let lv = current_cost_2state_scalar(p, *pair, scenario.cost(v), lambda)?;
                if lu > lv + CASE_TOL {
                    continue 'candidate;
                }
            }
        }
        return Ok(Some(u));
    }
    Ok(None)
}

/// Crossing point of two Case IV controls with equal `a₁₂` and equal cost.
pub fn case4_crossing(a: &KernelSet, cost_a: f64, b: &KernelSet, cost_b: f64) -> Result<f64> {
    let pa = ScalarPair::from_kernels(a)?;
    let pb = ScalarPair::from_kernels(b)?;
    let scale = pa.a12().abs().max(1.0);
    if (pa.a12() - pb.a12()).abs() > CASE_TOL * scale {
        return Err(Error::HypothesisViolated("a12 values differ".into()));
    }
    if (cost_a - cost_b).abs() > CASE_TOL {
        return Err(Error::HypothesisViolated("costs differ".into()));
    }
    if !(pa.v1 > pb.v1 && pa.v2 < pb.v2) {
        return Err(Error::HypothesisViolated("variance pattern must be v1a > v1b and v2a < v2b".into()));
    }
    Ok((pb.v2 - pa.v2) / (pa.v1 - pb.v1 + pb.v2 - pa.v2))
}
