use nalgebra::{DMatrix, DVector};

use super::testpoint::TestPoint;
use crate::error::{Error, Result};

/// Which log term to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogTermKind {
    Eta,
    Rho,
    Zeta,
    Gamma,
}

/// Inputs of the stage-`k` log terms.
///
/// `prev` is the marginal of `x_{k−1}`; at `k = 0` it is absent and the prior of `x_0`
/// takes the place of the transition from `x_{k−1}`.
#[derive(Debug, Clone, Copy)]
pub struct StageTerms<'a> {
    pub trans: &'a DMatrix<f64>,
    pub prior: &'a DVector<f64>,
    pub prev: Option<&'a DVector<f64>>,
    pub marg_k: &'a DVector<f64>,
    /// Bhattacharyya coefficients of the kernels generating `y_k`.
    pub xi_k: &'a DMatrix<f64>,
    /// Bhattacharyya coefficients of the kernels generating `y_{k+1}`.
    pub xi_k1: &'a DMatrix<f64>,
}

impl StageTerms<'_> {
    fn n(&self) -> usize {
        self.trans.nrows()
    }

    #[inline]
    fn t(&self, to: usize, from: usize) -> f64 {
        self.trans[(to, from)]
    }

    /// Affinity of `x_k` reached under two shifts: `Σ_z P(z) √(T(a|z) T(b|z))`, or `√(π(a)π(b))` at k = 0.
    fn entry_affinity(&self, a: usize, b: usize) -> f64 {
        match self.prev {
            None => (self.prior[a] * self.prior[b]).sqrt(),
            Some(prev) => (0..self.n())
                .filter(|&z| prev[z] > 0.0)
                .map(|z| prev[z] * (self.t(a, z) * self.t(b, z)).sqrt())
                .sum(),
        }
    }
}

fn ln(v: f64) -> f64 {
    if v > 0.0 {
        v.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Evaluate `η_k`, `ρ_k`, `ζ_k` or `γ` by direct summation; `−∞` when the sum vanishes.
pub fn log_term(kind: LogTermKind, st: &StageTerms<'_>, h_a: &TestPoint, h_b: &TestPoint) -> f64 {
    let n = st.n();
    match kind {
        LogTermKind::Gamma => {
            let mut s = 0.0;
            for x in 0..n {
                if let (Some(a), Some(b)) = (h_a.target(x), h_b.target(x)) {
                    s += (st.prior[a] * st.prior[b]).sqrt() * st.xi_k[(a, b)];
                }
            }
            ln(s)
        }
        LogTermKind::Eta => {
            let mut s = 0.0;
            for x in 0..n {
                let px = st.marg_k[x];
                if px == 0.0 {
                    continue;
                }
                let mut inner = 0.0;
                for xp in 0..n {
                    if let (Some(a), Some(b)) = (h_a.target(xp), h_b.target(xp)) {
                        inner += (st.t(a, x) * st.t(b, x)).sqrt() * st.xi_k1[(a, b)];
                    }
                }
                s += px * inner;
            }
            ln(s)
        }
        LogTermKind::Rho => {
            let mut s = 0.0;
            for x in 0..n {
                let (Some(a), Some(b)) = (h_a.target(x), h_b.target(x)) else { continue };
                let w = st.entry_affinity(a, b);
                if w == 0.0 {
                    continue;
                }
                let onward: f64 = (0..n).map(|xp| (st.t(xp, a) * st.t(xp, b)).sqrt()).sum();
                s += w * onward * st.xi_k[(a, b)];
            }
            ln(s)
        }
        LogTermKind::Zeta => {
            let mut s = 0.0;
            for x in 0..n {
                let Some(a) = h_a.target(x) else { continue };
                let w = st.entry_affinity(a, x);
                if w == 0.0 {
                    continue;
                }
                let mut inner = 0.0;
                for xp in 0..n {
                    if let Some(b) = h_b.target(xp) {
                        inner += (st.t(xp, a) * st.t(b, x)).sqrt() * st.xi_k1[(b, xp)];
                    }
                }
                s += w * st.xi_k[(a, x)] * inner;
            }
            ln(s)
        }
    }
}

/// The three stage-`k` entries of the information matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GEntries {
    /// `G^{k+1}_{k+1,k+1}`
    pub g_next: f64,
    /// `G^{k+1}_{k+1,k}`
    pub g_cross: f64,
    /// `G^{k+1}_{k,k}`
    pub g_curr: f64,
}

/// Closed-form entries from the log terms. `h_k` shifts `x_k`, `h_k1` shifts `x_{k+1}`;
/// `hn_k`, `hn_k1` are their negated counterparts.
pub fn g_entries_paper(
    st: &StageTerms<'_>,
    h_k: &TestPoint,
    hn_k: &TestPoint,
    h_k1: &TestPoint,
    hn_k1: &TestPoint,
) -> Result<GEntries> {
    let zero = TestPoint::zero(st.n());
    let eta0 = log_term(LogTermKind::Eta, st, h_k1, &zero);
    let rho0 = log_term(LogTermKind::Rho, st, h_k, &zero);
    if eta0 == f64::NEG_INFINITY || rho0 == f64::NEG_INFINITY {
        return Err(Error::DegenerateTestPoint);
    }
    let eta_pm = log_term(LogTermKind::Eta, st, h_k1, hn_k1).exp();
    let rho_pm = log_term(LogTermKind::Rho, st, h_k, hn_k).exp();
    let z = |a: &TestPoint, b: &TestPoint| log_term(LogTermKind::Zeta, st, a, b).exp();
    let g_next = 2.0 * (1.0 - eta_pm) / (2.0 * eta0).exp();
    let g_curr = 2.0 * (1.0 - rho_pm) / (2.0 * rho0).exp();
    let num = z(h_k, h_k1) - z(hn_k, h_k1) + z(hn_k, hn_k1) - z(h_k, hn_k1);
    let g_cross = num / (eta0 + rho0).exp();
    Ok(GEntries { g_next, g_cross, g_curr })
}

/// Entries from the defining expectations, summed over `(x_{k−1}, x_k, x_{k+1})` with
/// explicit likelihood ratios and no unit-mean assumption.
pub fn g_entries_exact(
    st: &StageTerms<'_>,
    h_k: &TestPoint,
    hn_k: &TestPoint,
    h_k1: &TestPoint,
    hn_k1: &TestPoint,
) -> Result<GEntries> {
    let n = st.n();
    // Entry weight and transition ratio for x_k, over the x_{k-1} sum (or prior at k = 0).
    let mut m = Moments::default();
    let mut visit = |wz: f64, num_k: &dyn Fn(usize) -> f64, x: usize, den_k: f64| {
        for xp in 0..n {
            let txp = st.t(xp, x);
            let w = wz * den_k * txp;
            if w == 0.0 {
                continue;
            }
            let ratio_l = |h: &TestPoint| h.target(xp).map(|b| st.t(b, x) / txp);
            let ratio_k = |h: &TestPoint| h.target(x).map(|a| num_k(a) * st.t(xp, a) / (den_k * txp));
            let (lp, lm) = (ratio_l(h_k1), ratio_l(hn_k1));
            let (kp, km) = (ratio_k(h_k), ratio_k(hn_k));
            let xi_l = |h: &TestPoint, g: &TestPoint| match (h.target(xp), g.target(xp)) {
                (Some(a), Some(b)) => st.xi_k1[(a, b)],
                _ => 0.0,
            };
            let xi_k = |h: &TestPoint, g: &TestPoint| match (h.target(x), g.target(x)) {
                (Some(a), Some(b)) => st.xi_k[(a, b)],
                _ => 0.0,
            };
            let id_l = |h: &TestPoint| h.target(xp).map_or(0.0, |a| st.xi_k1[(a, xp)]);
            let id_k = |h: &TestPoint| h.target(x).map_or(0.0, |a| st.xi_k[(a, x)]);
            let lp = lp.unwrap_or(0.0);
            let lm = lm.unwrap_or(0.0);
            let kp = kp.unwrap_or(0.0);
            let km = km.unwrap_or(0.0);
            m.l_p += w * lp;
            m.l_m += w * lm;
            m.l_pm += w * (lp * lm).sqrt() * xi_l(h_k1, hn_k1);
            m.sl_p += w * lp.sqrt() * id_l(h_k1);
            m.k_p += w * kp;
            m.k_m += w * km;
            m.k_pm += w * (kp * km).sqrt() * xi_k(h_k, hn_k);
            m.sk_p += w * kp.sqrt() * id_k(h_k);
            m.lk_pp += w * (lp * kp).sqrt() * id_l(h_k1) * id_k(h_k);
            m.lk_pm += w * (lp * km).sqrt() * id_l(h_k1) * id_k(hn_k);
            m.lk_mp += w * (lm * kp).sqrt() * id_l(hn_k1) * id_k(h_k);
            m.lk_mm += w * (lm * km).sqrt() * id_l(hn_k1) * id_k(hn_k);
        }
    };
    match st.prev {
        None => {
            for x in 0..n {
                let px = st.prior[x];
                if px == 0.0 {
                    continue;
                }
                visit(1.0, &|a| st.prior[a], x, px);
            }
        }
        Some(prev) => {
            for z in 0..n {
                if prev[z] == 0.0 {
                    continue;
                }
                for x in 0..n {
                    let txz = st.t(x, z);
                    if txz == 0.0 {
                        continue;
                    }
                    visit(prev[z], &|a| st.t(a, z), x, txz);
                }
            }
        }
    }
    if !(m.sl_p > 0.0) || !(m.sk_p > 0.0) {
        return Err(Error::DegenerateTestPoint);
    }
    Ok(GEntries {
        g_next: (m.l_p - 2.0 * m.l_pm + m.l_m) / (m.sl_p * m.sl_p),
        g_cross: (m.lk_pp - m.lk_pm - m.lk_mp + m.lk_mm) / (m.sl_p * m.sk_p),
        g_curr: (m.k_p - 2.0 * m.k_pm + m.k_m) / (m.sk_p * m.sk_p),
    })
}

#[derive(Default)]
struct Moments {
    l_p: f64,
    l_m: f64,
    l_pm: f64,
    sl_p: f64,
    k_p: f64,
    k_m: f64,
    k_pm: f64,
    sk_p: f64,
    lk_pp: f64,
    lk_pm: f64,
    lk_mp: f64,
    lk_mm: f64,
}

/// Initial information `J₀` from the prior and the kernels of `y_0`.
pub fn j0_paper(prior: &DVector<f64>, xi0: &DMatrix<f64>, h: &TestPoint, hn: &TestPoint) -> Result<f64> {
    let st = StageTerms { trans: xi0, prior, prev: None, marg_k: prior, xi_k: xi0, xi_k1: xi0 };
    let g0 = log_term(LogTermKind::Gamma, &st, h, &TestPoint::zero(prior.len()));
    if g0 == f64::NEG_INFINITY {
        return Err(Error::DegenerateTestPoint);
    }
    let gpm = log_term(LogTermKind::Gamma, &st, h, hn).exp();
    Ok(2.0 * (1.0 - gpm) / (2.0 * g0).exp())
}

/// `J₀` from its defining expectations over `x_0`.
pub fn j0_exact(prior: &DVector<f64>, xi0: &DMatrix<f64>, h: &TestPoint, hn: &TestPoint) -> Result<f64> {
    let (mut lp, mut lm, mut lpm, mut slp) = (0.0, 0.0, 0.0, 0.0);
    for x in 0..prior.len() {
        let w = prior[x];
        if w == 0.0 {
            continue;
        }
        let rp = h.target(x).map(|a| prior[a] / w);
        let rm = hn.target(x).map(|a| prior[a] / w);
        lp += w * rp.unwrap_or(0.0);
        lm += w * rm.unwrap_or(0.0);
        if let (Some(a), Some(b), Some(p), Some(q)) = (h.target(x), hn.target(x), rp, rm) {
            lpm += w * (p * q).sqrt() * xi0[(a, b)];
        }
        if let (Some(a), Some(p)) = (h.target(x), rp) {
            slp += w * p.sqrt() * xi0[(a, x)];
        }
    }
    if !(slp > 0.0) {
        return Err(Error::DegenerateTestPoint);
    }
    Ok((lp - 2.0 * lpm + lm) / (slp * slp))
}
