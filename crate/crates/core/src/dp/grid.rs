use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::model::binomial;

/// Default cap on the number of grid points.
pub const GRID_CAP: usize = 2_000_000;

/// Regular simplex grid: all compositions of `resolution` into `n` parts, scaled by `1/resolution`,
/// in lexicographic order. For `n = 2` this is `p ∈ {0, Δ, …, 1}` in the first coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefGrid {
    n: usize,
    resolution: usize,
    points: Vec<f64>,
    counts: Vec<u32>,
    comb: Vec<Vec<usize>>,
}

/// Number of compositions of `r` into `m` nonnegative parts.
fn compositions(r: usize, m: usize) -> usize {
    if m == 0 {
        return usize::from(r == 0);
    }
    binomial(r + m - 1, m - 1)
}

/// Build the grid for `n` states at `resolution` subdivisions per edge.
pub fn build_grid(n: usize, resolution: usize) -> Result<BeliefGrid> {
    build_grid_capped(n, resolution, GRID_CAP)
}

/// Grid for two states from a step `Δ` with `1/Δ` integral.
pub fn build_grid_step(n: usize, step: f64) -> Result<BeliefGrid> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::InvalidGrid(format!("step {step} must lie in (0, 0.5]")));
    }
    let r = (1.0 / step).round();
    if ((1.0 / step) - r).abs() > 1e-6 * r {
        return Err(Error::InvalidGrid(format!("1/step must be an integer, got {}", 1.0 / step)));
    }
    build_grid(n, r as usize)
}

pub fn build_grid_capped(n: usize, resolution: usize, cap: usize) -> Result<BeliefGrid> {
    if n < 2 {
        return Err(Error::InvalidGrid("at least two states are required".into()));
    }
    if resolution < 2 {
        return Err(Error::InvalidGrid("resolution must give at least three points per edge".into()));
    }
    let total = compositions(resolution, n);
    if total > cap {
        return Err(Error::GridTooLarge { points: total, cap });
    }
    let mut counts = Vec::with_capacity(total * n);
    let mut cur = vec![0u32; n];
    enumerate(&mut cur, 0, resolution as u32, &mut counts);
    let inv = 1.0 / resolution as f64;
    let points = counts.iter().map(|&c| c as f64 * inv).collect();
    let comb = (0..=resolution)
        .map(|r| (0..=n).map(|m| compositions(r, m)).collect())
        .collect();
    Ok(BeliefGrid { n, resolution, points, counts, comb })
}

fn enumerate(cur: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<u32>) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining;
        out.extend_from_slice(cur);
        return;
    }
    for v in 0..=remaining {
        cur[pos] = v;
        enumerate(cur, pos + 1, remaining - v, out);
    }
}

impl BeliefGrid {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.counts.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Coordinates of grid point `i`.
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.n..(i + 1) * self.n]
    }

    pub fn point_vector(&self, i: usize) -> DVector<f64> {
        DVector::from_column_slice(self.point(i))
    }

    /// Integer composition of grid point `i`.
    pub fn counts(&self, i: usize) -> &[u32] {
        &self.counts[i * self.n..(i + 1) * self.n]
    }

    /// Lexicographic rank of a composition summing to the resolution.
    pub fn rank(&self, counts: &[u32]) -> usize {
        let mut idx = 0;
        let mut r = self.resolution;
        let n = self.n;
        for (pos, &c) in counts.iter().enumerate().take(n - 1) {
            let m = n - pos - 1;
            for v in 0..c as usize {
                idx += self.comb[r - v][m];
            }
            r -= c as usize;
        }
        idx
    }

    /// Grid point nearest to `p` (largest-remainder rounding of `resolution · p`).
    pub fn nearest(&self, p: &[f64]) -> usize {
        let d = self.resolution as f64;
        let mut base: Vec<u32> = p.iter().map(|v| (v.max(0.0) * d).floor() as u32).collect();
        let used: u32 = base.iter().sum();
        let mut left = (self.resolution as i64 - used as i64).max(0) as usize;
        let mut order: Vec<usize> = (0..self.n).collect();
        let frac = |i: usize| p[i].max(0.0) * d - base[i] as f64;
        order.sort_by(|&a, &b| frac(b).partial_cmp(&frac(a)).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
        for &i in &order {
            if left == 0 {
                break;
            }
            base[i] += 1;
            left -= 1;
        }
        let total: u32 = base.iter().sum();
        if total as usize > self.resolution {
            let mut excess = total as usize - self.resolution;
            for &i in order.iter().rev() {
                while excess > 0 && base[i] > 0 {
                    base[i] -= 1;
                    excess -= 1;
                }
            }
        }
        self.rank(&base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_state_grid() {
        let g = build_grid_step(2, 0.5).unwrap();
        assert_eq!(g.len(), 3);
        let firsts: Vec<f64> = (0..3).map(|i| g.point(i)[0]).collect();
        assert_eq!(firsts, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn three_state_grid() {
        assert_eq!(build_grid(3, 2).unwrap().len(), 6);
    }

    #[test]
    fn four_state_large_grid() {
        let g = build_grid(4, 100).unwrap();
        assert_eq!(g.len(), 176_851);
        let mut count = 0usize;
        for a in 0..=100 {
            for b in 0..=(100 - a) {
                count += 101 - a - b;
            }
        }
        assert_eq!(count, 176_851);
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(build_grid_capped(4, 100, 1000), Err(Error::GridTooLarge { .. })));
    }

    #[test]
    fn rank_inverts_enumeration() {
        let g = build_grid(4, 7).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.rank(g.counts(i)), i);
        }
        for i in 1..g.len() {
            assert!(g.counts(i - 1) < g.counts(i));
        }
    }

    #[test]
    fn nearest_point() {
        let g = build_grid(3, 10).unwrap();
        let i = g.nearest(&[0.31, 0.29, 0.40]);
        assert_eq!(g.counts(i), &[3, 3, 4]);
        let i = g.nearest(&[1.0, 0.0, 0.0]);
        assert_eq!(g.counts(i), &[10, 0, 0]);
    }
}
