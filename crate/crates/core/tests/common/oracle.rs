//! Brute-force trajectory oracle for the sequential bound.

use nalgebra::DMatrix;
use sensetrack::model::MarkovChain;
use sensetrack::wwlb::{GEntries, Negation, TestPoint};

/// Shift of one time index by a test point; `None` leaves the trajectory unchanged.
pub type Shift<'a> = Option<(usize, &'a TestPoint)>;

pub fn traj_prob(chain: &MarkovChain, x: &[usize]) -> f64 {
    let mut p = chain.prior()[x[0]];
    for t in 1..x.len() {
        p *= chain.prob(x[t], x[t - 1]);
    }
    p
}

pub fn apply(x: &[usize], s: Shift) -> Option<Vec<usize>> {
    let mut out = x.to_vec();
    if let Some((t, h)) = s {
        out[t] = h.target(x[t])?;
    }
    Some(out)
}

/// `Σ_X √(p(A X) p(B X)) Π_t ξ_t(A X_t, B X_t)` over trajectories with `p(X) > 0`.
pub fn moment(chain: &MarkovChain, xis: &[DMatrix<f64>], a: Shift, b: Shift) -> f64 {
    let n = chain.n();
    let len = xis.len();
    let mut x = vec![0usize; len];
    let mut total = 0.0;
    loop {
        if traj_prob(chain, &x) > 0.0 {
            if let (Some(xa), Some(xb)) = (apply(&x, a), apply(&x, b)) {
                let mut v = (traj_prob(chain, &xa) * traj_prob(chain, &xb)).sqrt();
                for t in 0..len {
                    v *= xis[t][(xa[t], xb[t])];
                }
                total += v;
            }
        }
        let mut i = 0;
        while i < len {
            x[i] += 1;
            if x[i] < n {
                break;
            }
            x[i] = 0;
            i += 1;
        }
        if i == len {
            break;
        }
    }
    total
}

/// G entries at stage `k` from full-trajectory expectations; `xis[t]` are the kernels of `y_t`, `t = 0..=k+1`.
pub fn oracle_g(chain: &MarkovChain, xis: &[DMatrix<f64>], h_k: &TestPoint, h_k1: &TestPoint, neg: Negation) -> GEntries {
    let k1 = xis.len() - 1;
    let k = k1 - 1;
    let (hn_k, hn_k1) = (h_k.negate(neg), h_k1.negate(neg));
    let m = |a: Shift, b: Shift| moment(chain, xis, a, b);
    let (lp, lm) = (Some((k1, h_k1)), Some((k1, &hn_k1)));
    let (kp, km) = (Some((k, h_k)), Some((k, &hn_k)));
    let sl = m(lp, None);
    let sk = m(kp, None);
    GEntries {
        g_next: (m(lp, lp) - 2.0 * m(lp, lm) + m(lm, lm)) / (sl * sl),
        g_cross: (m(lp, kp) - m(lp, km) - m(lm, kp) + m(lm, km)) / (sl * sk),
        g_curr: (m(kp, kp) - 2.0 * m(kp, km) + m(km, km)) / (sk * sk),
    }
}

