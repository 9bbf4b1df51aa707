use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Tolerance for column and prior sums at validation time.
pub const STOCHASTIC_TOL: f64 = 1e-9;

/// Finite-state Markov chain with a column-stochastic transition matrix.
///
/// Entry `(j, i)` of `trans` is the probability of moving to state `j` from state `i`,
/// so the one-step prediction of a distribution `p` is `trans * p`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    trans: DMatrix<f64>,
    prior: DVector<f64>,
}

/// Validate a transition matrix and prior. Never renormalizes.
pub fn validate_chain(trans: DMatrix<f64>, prior: DVector<f64>) -> Result<MarkovChain> {
    let n = trans.nrows();
    if trans.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "transition matrix is {}x{}",
            n,
            trans.ncols()
        )));
    }
    if n < 2 {
        return Err(Error::DimensionMismatch("at least two states are required".into()));
    }
    if prior.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "prior has length {} but the chain has {} states",
            prior.len(),
            n
        )));
    }
    for i in 0..n {
        for j in 0..n {
            let v = trans[(j, i)];
            if !v.is_finite() || v < 0.0 {
                return Err(Error::NegativeEntry { row: j, col: i, value: v });
            }
        }
        let sum: f64 = trans.column(i).sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::NonStochastic { column: i, sum });
        }
    }
    if prior.iter().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(Error::InvalidPrior("negative or non-finite entry".into()));
    }
    let s = prior.sum();
    if (s - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::InvalidPrior(format!("entries sum to {s}")));
    }
    Ok(MarkovChain { trans, prior })
}

impl MarkovChain {
    /// Build from columns `cols[i][j] = P(j | i)`.
    pub fn from_columns(cols: &[Vec<f64>], prior: &[f64]) -> Result<Self> {
        let n = cols.len();
        if cols.iter().any(|c| c.len() != n) {
            return Err(Error::DimensionMismatch("transition columns must all have length n".into()));
        }
        let trans = DMatrix::from_fn(n, n, |j, i| cols[i][j]);
        validate_chain(trans, DVector::from_column_slice(prior))
    }

    pub fn n(&self) -> usize {
        self.trans.nrows()
    }

    pub fn trans(&self) -> &DMatrix<f64> {
        &self.trans
    }

    pub fn prior(&self) -> &DVector<f64> {
        &self.prior
    }

    /// P(next = j | current = i).
    #[inline]
    pub fn prob(&self, j: usize, i: usize) -> f64 {
        self.trans[(j, i)]
    }

    /// Columns as nested vectors, `out[i][j] = P(j | i)`.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|i| self.trans.column(i).iter().copied().collect()).collect()
    }

    /// One-step prediction `P p`.
    pub fn predict(&self, p: &DVector<f64>) -> DVector<f64> {
        &self.trans * p
    }
}

/// Marginal distribution of the state after `k` steps, `P^k π`.
pub fn state_marginal(chain: &MarkovChain, k: usize) -> DVector<f64> {
    let mut p = chain.prior.clone();
    for _ in 0..k {
        p = chain.predict(&p);
    }
    p
}

/// Marginals for stages `0..=k`.
pub fn state_marginals(chain: &MarkovChain, k: usize) -> Vec<DVector<f64>> {
    let mut out = Vec::with_capacity(k + 1);
    let mut p = chain.prior.clone();
    out.push(p.clone());
    for _ in 0..k {
        p = chain.predict(&p);
        out.push(p.clone());
    }
    out
}
