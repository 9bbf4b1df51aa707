use nalgebra::{DMatrix, DVector};

use super::divergence::xi_matrix;
use super::terms::{g_entries_exact, g_entries_paper, j0_exact, j0_paper, GEntries, StageTerms};
use super::testpoint::{Negation, TestPoint};
use crate::error::{Error, Result};
use crate::model::{state_marginal, MarkovChain, Scenario};

/// Closed forms or defining expectations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WwlbMode {
    Paper,
    #[default]
    Exact,
}

/// Chain, per-control Bhattacharyya matrices and settings for the sequential bound.
#[derive(Debug, Clone)]
pub struct WwlbProblem {
    pub chain: MarkovChain,
    pub xi: Vec<DMatrix<f64>>,
    pub initial_control: usize,
    pub mode: WwlbMode,
    pub negation: Negation,
    marginals: Vec<DVector<f64>>,
}

impl WwlbProblem {
    pub fn new(
        chain: MarkovChain,
        xi: Vec<DMatrix<f64>>,
        initial_control: usize,
        mode: WwlbMode,
        negation: Negation,
        horizon: usize,
    ) -> Result<Self> {
        if initial_control >= xi.len() {
            return Err(Error::UnknownControl(initial_control));
        }
        let n = chain.n();
        if xi.iter().any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::DimensionMismatch("Bhattacharyya matrices must be n x n".into()));
        }
        let marginals = (0..=horizon + 1).map(|k| state_marginal(&chain, k)).collect();
        Ok(Self { chain, xi, initial_control, mode, negation, marginals })
    }

    pub fn from_scenario(s: &Scenario, mode: WwlbMode, negation: Negation) -> Result<Self> {
        let xi = s.kernels.iter().map(xi_matrix).collect::<Result<Vec<_>>>()?;
        Self::new(s.chain.clone(), xi, s.initial_control_id(), mode, negation, s.horizon)
    }

    pub fn n(&self) -> usize {
        self.chain.n()
    }

    pub fn num_controls(&self) -> usize {
        self.xi.len()
    }

    fn marginal(&self, k: usize) -> DVector<f64> {
        self.marginals.get(k).cloned().unwrap_or_else(|| state_marginal(&self.chain, k))
    }

    fn check_control(&self, u: usize) -> Result<()> {
        if u >= self.xi.len() {
            return Err(Error::UnknownControl(u));
        }
        Ok(())
    }
}

/// Running state of the sequential recursion after `stage` advances.
#[derive(Debug, Clone, PartialEq)]
pub struct WwlbAccumulator {
    pub stage: usize,
    /// `A_k`; `None` stands for the boundary `A₀⁻¹ = 0`.
    pub a_value: Option<f64>,
    /// `G^k_{k,k−1}` from the previous advance (0 at the boundary).
    pub last_cross: f64,
    /// Controls `u_{−1}, u_0, …, u_{k−1}`.
    pub committed: Vec<usize>,
    /// Test points of the last advance.
    pub last_pair: Option<(TestPoint, TestPoint)>,
    /// Latest `J_k` (`J₀` when requested at construction).
    pub j_value: Option<f64>,
    pub mode: WwlbMode,
}

impl WwlbAccumulator {
    /// Boundary accumulator at stage 0 with `u_{−1}` committed.
    pub fn new(problem: &WwlbProblem) -> Self {
        Self {
            stage: 0,
            a_value: None,
            last_cross: 0.0,
            committed: vec![problem.initial_control],
            last_pair: None,
            j_value: None,
            mode: problem.mode,
        }
    }

    /// Boundary accumulator carrying `J₀` for `h0`.
    pub fn with_j0(problem: &WwlbProblem, h0: &TestPoint) -> Result<Self> {
        let mut a = Self::new(problem);
        a.j_value = Some(j0(problem, h0)?);
        Ok(a)
    }

    fn last_control(&self) -> usize {
        *self.committed.last().expect("u_{-1} is always committed")
    }
}

/// `J₀` for test point `h0` under the problem's mode and negation.
pub fn j0(problem: &WwlbProblem, h0: &TestPoint) -> Result<f64> {
    let xi0 = &problem.xi[problem.initial_control];
    let hn = h0.negate(problem.negation);
    let prior = problem.chain.prior();
    match problem.mode {
        WwlbMode::Paper => j0_paper(prior, xi0, h0, &hn),
        WwlbMode::Exact => j0_exact(prior, xi0, h0, &hn),
    }
}

/// Entries `G^{k+1}` at the accumulator's stage for candidate control `u_k`.
pub fn g_entries(
    problem: &WwlbProblem,
    accum: &WwlbAccumulator,
    u_k: usize,
    h_k: &TestPoint,
    h_k1: &TestPoint,
) -> Result<GEntries> {
    problem.check_control(u_k)?;
    let n = problem.n();
    if h_k.n() != n || h_k1.n() != n {
        return Err(Error::DimensionMismatch("test point size differs from state count".into()));
    }
    let k = accum.stage;
    let prev = if k == 0 { None } else { Some(problem.marginal(k - 1)) };
    let marg_k = problem.marginal(k);
    let st = StageTerms {
        trans: problem.chain.trans(),
        prior: problem.chain.prior(),
        prev: prev.as_ref(),
        marg_k: &marg_k,
        xi_k: &problem.xi[accum.last_control()],
        xi_k1: &problem.xi[u_k],
    };
    let hn_k = h_k.negate(problem.negation);
    let hn_k1 = h_k1.negate(problem.negation);
    match problem.mode {
        WwlbMode::Paper => g_entries_paper(&st, h_k, &hn_k, h_k1, &hn_k1),
        WwlbMode::Exact => g_entries_exact(&st, h_k, &hn_k, h_k1, &hn_k1),
    }
}

/// Recursion step from precomputed entries: returns `(A_{k+1}, J_{k+1})`.
pub fn recursion_step(accum: &WwlbAccumulator, g: &GEntries) -> Result<(f64, f64)> {
    let a_next = match accum.a_value {
        None => g.g_curr,
        Some(a) => g.g_curr - accum.last_cross * accum.last_cross / a,
    };
    if !(a_next > 0.0) || !a_next.is_finite() {
        return Err(Error::DegenerateRecursion(a_next));
    }
    let j = g.g_next - g.g_cross * g.g_cross / a_next;
    Ok((a_next, j))
}

/// Advance the accumulator with control `u_k` and test points `(h_k, h_{k+1})`.
pub fn advance(
    problem: &WwlbProblem,
    accum: &WwlbAccumulator,
    u_k: usize,
    h_k: &TestPoint,
    h_k1: &TestPoint,
) -> Result<(f64, WwlbAccumulator)> {
    let g = g_entries(problem, accum, u_k, h_k, h_k1)?;
    let (a_next, j) = recursion_step(accum, &g)?;
    let mut committed = accum.committed.clone();
    committed.push(u_k);
    Ok((
        j,
        WwlbAccumulator {
            stage: accum.stage + 1,
            a_value: Some(a_next),
            last_cross: g.g_cross,
            committed,
            last_pair: Some((h_k.clone(), h_k1.clone())),
            j_value: Some(j),
            mode: accum.mode,
        },
    ))
}

/// Best score of a candidate control over test-point pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct VScore {
    pub v: f64,
    pub j: f64,
    pub pair: usize,
}

/// `v(u) = max 1/J_{k+1}` over pairs, skipping degenerate pairs.
pub fn v_score(
    problem: &WwlbProblem,
    accum: &WwlbAccumulator,
    u: usize,
    pairs: &[(TestPoint, TestPoint)],
) -> Result<VScore> {
    let mut best: Option<VScore> = None;
    for (idx, (h_k, h_k1)) in pairs.iter().enumerate() {
        let Ok(g) = g_entries(problem, accum, u, h_k, h_k1) else { continue };
        let Ok((_, j)) = recursion_step(accum, &g) else { continue };
        if !(j > 0.0) || !j.is_finite() {
            continue;
        }
        let v = 1.0 / j;
        if best.as_ref().is_none_or(|b| v > b.v) {
            best = Some(VScore { v, j, pair: idx });
        }
    }
    best.ok_or(Error::AllTestPointsDegenerate)
}

/// All ordered pairs drawn from a test-point list.
pub fn all_pairs(points: &[TestPoint]) -> Vec<(TestPoint, TestPoint)> {
    let mut out = Vec::with_capacity(points.len() * points.len());
    for a in points {
        for b in points {
            out.push((a.clone(), b.clone()));
        }
    }
    out
}

/// Reported bound `h_scale² / J`.
pub fn wwlb_bound(j: f64, h_scale: f64) -> Result<f64> {
    if !(j > 0.0) {
        return Err(Error::NonpositiveInformation(j));
    }
    Ok(h_scale * h_scale / j)
}
