use std::sync::Arc;

use super::grid::BeliefGrid;

/// Cost-to-go values `J̄_k` on a grid.
#[derive(Debug, Clone)]
pub struct ValueTable {
    pub stage: usize,
    pub values: Vec<f64>,
    pub grid: Arc<BeliefGrid>,
}

/// Argmin controls on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    pub stage: usize,
    pub choice: Vec<usize>,
}

/// Result of interpolating a table at a belief.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interpolated {
    pub value: f64,
    /// True when barycentric interpolation fell back to the nearest grid point.
    pub fallback: bool,
}

impl ValueTable {
    pub fn new(stage: usize, values: Vec<f64>, grid: Arc<BeliefGrid>) -> Self {
        Self { stage, values, grid }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Interpolate a table at `p`: linear for two states, Freudenthal barycentric otherwise.
pub fn interpolate_value(table: &ValueTable, p: &[f64]) -> f64 {
    interpolate_detail(&table.values, &table.grid, p).value
}

pub(crate) fn interpolate_detail(values: &[f64], grid: &BeliefGrid, p: &[f64]) -> Interpolated {
    let d = grid.resolution();
    let df = d as f64;
    let n = grid.n();
    if n == 2 {
        let x = (p[0] * df).clamp(0.0, df);
        let i = (x.floor() as usize).min(d - 1);
        let w = x - i as f64;
        let value = if w == 0.0 { values[i] } else { (1.0 - w) * values[i] + w * values[i + 1] };
        return Interpolated { value, fallback: false };
    }
    let m = n - 1;
    let mut u = [0.0f64; 16];
    let mut heap_u;
    let u: &mut [f64] = if m <= 16 {
        &mut u[..m]
    } else {
        heap_u = vec![0.0; m];
        &mut heap_u[..]
    };
    let mut acc = 0.0;
    for j in 0..m {
        acc += p[j];
        u[j] = (acc * df).clamp(0.0, df);
    }
    for j in 1..m {
        if u[j] < u[j - 1] {
            u[j] = u[j - 1];
        }
    }
    let base: Vec<u32> = u.iter().map(|&x| (x.floor() as u32).min(d as u32)).collect();
    let frac: Vec<f64> = u.iter().zip(&base).map(|(x, &b)| x - b as f64).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        frac[b]
            .partial_cmp(&frac[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.cmp(&a))
    });
    let mut vertex = base.clone();
    let mut counts = vec![0u32; n];
    let mut value = 0.0;
    let mut prev_f = 1.0;
    for step in 0..=m {
        let f_next = if step < m { frac[order[step]] } else { 0.0 };
        let w = prev_f - f_next;
        if w > 0.0 {
            match lattice_to_counts(&vertex, d as u32, &mut counts) {
                true => value += w * values[grid.rank(&counts)],
                false => {
                    let i = grid.nearest(p);
                    return Interpolated { value: values[i], fallback: true };
                }
            }
        }
        if step < m {
            vertex[order[step]] += 1;
        }
        prev_f = f_next;
    }
    Interpolated { value, fallback: false }
}

fn lattice_to_counts(u: &[u32], d: u32, counts: &mut [u32]) -> bool {
    let mut prev = 0u32;
    for (j, &x) in u.iter().enumerate() {
        if x < prev || x > d {
            return false;
        }
        counts[j] = x - prev;
        prev = x;
    }
    counts[u.len()] = d - prev;
    true
}
