use crate::error::{Error, Result};

/// Per-sensor sample counts `(N_1, …, N_s)`.
pub type Allocation = Vec<usize>;

/// A sensing control with its normalized cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Control {
    pub id: usize,
    pub allocation: Option<Allocation>,
    pub cost: f64,
}

impl Control {
    pub fn new(id: usize, allocation: Option<Allocation>, cost: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&cost) {
            return Err(Error::CostOutOfRange(cost));
        }
        Ok(Self { id, allocation, cost })
    }

    /// Total number of requested samples, if the control carries an allocation.
    pub fn samples(&self) -> Option<usize> {
        self.allocation.as_ref().map(|a| a.iter().sum())
    }
}

/// All allocations over `num_sensors` sensors with totals in `1..=budget`
/// (or `0..=budget` with `include_empty`), in lexicographic order.
pub fn enumerate_controls(num_sensors: usize, budget: usize, include_empty: bool) -> Result<Vec<Allocation>> {
    if num_sensors == 0 {
        return Err(Error::InvalidScenario("at least one sensor is required".into()));
    }
    if budget == 0 && !include_empty {
        return Err(Error::BudgetZero);
    }
    let mut out = Vec::new();
    let mut cur = vec![0usize; num_sensors];
    fill(&mut cur, 0, budget, &mut out);
    if !include_empty {
        out.retain(|a| a.iter().any(|&v| v > 0));
    }
    Ok(out)
}

fn fill(cur: &mut Vec<usize>, pos: usize, remaining: usize, out: &mut Vec<Allocation>) {
    if pos == cur.len() {
        out.push(cur.clone());
        return;
    }
    for v in 0..=remaining {
        cur[pos] = v;
        fill(cur, pos + 1, remaining - v, out);
    }
    cur[pos] = 0;
}

/// Closed-form count `Σ_{i=1}^{N} C(i+s−1, i)`.
pub fn control_count(num_sensors: usize, budget: usize) -> usize {
    (1..=budget).map(|i| binomial(i + num_sensors - 1, i)).sum()
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r as usize
}
