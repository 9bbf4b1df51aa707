use super::grid::BeliefGrid;
use super::table::{PolicyTable, ValueTable};
use crate::error::{Error, Result};

/// Contiguous interval of first-coordinate beliefs sharing one control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub p_low: f64,
    pub p_high: f64,
    pub control: usize,
}

/// Compressed two-state policy.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    pub intervals: Vec<Threshold>,
    /// Controls whose region is split into more than one interval.
    pub non_contiguous: Vec<usize>,
}

/// Compress per-point choices over ordered first coordinates into maximal intervals.
pub fn compress_intervals(ps: &[f64], choice: &[usize]) -> ThresholdReport {
    let mut intervals: Vec<Threshold> = Vec::new();
    for (&p, &c) in ps.iter().zip(choice) {
        match intervals.last_mut() {
            Some(last) if last.control == c => last.p_high = p,
            _ => intervals.push(Threshold { p_low: p, p_high: p, control: c }),
        }
    }
    let mut seen: Vec<usize> = Vec::new();
    let mut split: Vec<usize> = Vec::new();
    for t in &intervals {
        if seen.contains(&t.control) {
            if !split.contains(&t.control) {
                split.push(t.control);
            }
        } else {
            seen.push(t.control);
        }
    }
    split.sort_unstable();
    ThresholdReport { intervals, non_contiguous: split }
}

/// Thresholds of a two-state policy table.
pub fn extract_thresholds(policy: &PolicyTable, grid: &BeliefGrid) -> Result<ThresholdReport> {
    if grid.n() != 2 {
        return Err(Error::NotTwoState);
    }
    let ps: Vec<f64> = (0..grid.len()).map(|i| grid.point(i)[0]).collect();
    Ok(compress_intervals(&ps, &policy.choice))
}

/// Outcome of a second-difference concavity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcavityReport {
    pub pass: bool,
    pub max_second_difference: f64,
    pub tolerance: f64,
    /// Grid index at the centre of the worst second difference.
    pub worst_index: usize,
    /// True for more than two states, where the check is informative only.
    pub advisory: bool,
}

/// Relative tolerance of the concavity check.
pub const CONCAVITY_TOL: f64 = 1e-6;

/// Second differences of values along the grid; concave tables have none above tolerance.
pub fn check_concavity(table: &ValueTable) -> ConcavityReport {
    check_concavity_values(&table.values, &table.grid)
}

pub fn check_concavity_values(values: &[f64], grid: &BeliefGrid) -> ConcavityReport {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let tolerance = CONCAVITY_TOL * scale;
    let n = grid.n();
    let mut worst = f64::NEG_INFINITY;
    let mut worst_index = 0;
    if n == 2 {
        for i in 1..values.len().saturating_sub(1) {
            let sd = values[i - 1] - 2.0 * values[i] + values[i + 1];
            if sd > worst {
                worst = sd;
                worst_index = i;
            }
        }
    } else {
        let mut lo = vec![0u32; n];
        let mut hi = vec![0u32; n];
        for i in 0..grid.len() {
            let c = grid.counts(i);
            for a in 0..n {
                for b in 0..n {
                    if a == b || c[a] == 0 || c[b] == 0 || a > b {
                        continue;
                    }
                    lo.copy_from_slice(c);
                    hi.copy_from_slice(c);
                    lo[a] -= 1;
                    lo[b] += 1;
                    hi[a] += 1;
                    hi[b] -= 1;
                    let sd = values[grid.rank(&lo)] - 2.0 * values[i] + values[grid.rank(&hi)];
                    if sd > worst {
                        worst = sd;
                        worst_index = i;
                    }
                }
            }
        }
    }
    if worst == f64::NEG_INFINITY {
        worst = 0.0;
    }
    ConcavityReport { pass: worst <= tolerance, max_second_difference: worst, tolerance, worst_index, advisory: n > 2 }
}
