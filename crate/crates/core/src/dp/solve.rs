use std::sync::Arc;

use rayon::prelude::*;

use super::grid::BeliefGrid;
use super::quadrature::{build_channel, ObservationChannel, QuadratureSpec};
use super::table::{interpolate_detail, PolicyTable, ValueTable};
use crate::cost::current_cost;
use crate::error::{Error, Result};
use crate::estimator::Belief;
use crate::model::{KernelSet, MarkovChain, Scenario};

/// How off-grid values of the next stage are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    #[default]
    Barycentric,
    Nearest,
}

/// Options for backward induction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DpOptions {
    pub quad: QuadratureSpec,
    pub interpolation: Interpolation,
}

/// Value and policy tables for stages `1..=L` (index 0 holds stage 1).
#[derive(Debug, Clone)]
pub struct DpSolution {
    pub grid: Arc<BeliefGrid>,
    pub values: Vec<ValueTable>,
    pub policies: Vec<PolicyTable>,
    /// Number of interpolations that fell back to the nearest grid point.
    pub fallbacks: usize,
}

impl DpSolution {
    pub fn horizon(&self) -> usize {
        self.values.len()
    }

    fn check_stage(&self, stage: usize) -> Result<()> {
        if stage == 0 || stage > self.horizon() {
            return Err(Error::StageOutOfRange { stage, horizon: self.horizon() });
        }
        Ok(())
    }

    /// Policy at the grid point nearest to `p`.
    pub fn policy_at(&self, stage: usize, p: &[f64]) -> Result<usize> {
        self.check_stage(stage)?;
        Ok(self.policies[stage - 1].choice[self.grid.nearest(p)])
    }

    /// Interpolated cost-to-go at `p`.
    pub fn value_at(&self, stage: usize, p: &[f64]) -> Result<f64> {
        self.check_stage(stage)?;
        Ok(interpolate_detail(&self.values[stage - 1].values, &self.grid, p).value)
    }
}

fn read(values: &[f64], grid: &BeliefGrid, p: &[f64], mode: Interpolation, fallbacks: &mut usize) -> f64 {
    match mode {
        Interpolation::Nearest => values[grid.nearest(p)],
        Interpolation::Barycentric => {
            let r = interpolate_detail(values, grid, p);
            if r.fallback {
                *fallbacks += 1;
            }
            r.value
        }
    }
}

/// `E_y J̄(Φ(p,u,y))` through a precomputed channel.
pub fn expected_with_channel(
    p: &[f64],
    chain: &MarkovChain,
    channel: &ObservationChannel,
    next_values: &[f64],
    grid: &BeliefGrid,
    mode: Interpolation,
    fallbacks: &mut usize,
) -> f64 {
    let n = p.len();
    let trans = chain.trans();
    let mut post = vec![0.0; n];
    let mut phi = vec![0.0; n];
    let mut total = 0.0;
    for k in 0..channel.nodes() {
        let c = channel.node(k);
        let mut mass = 0.0;
        for j in 0..n {
            post[j] = c[j] * p[j];
            mass += post[j];
        }
        if !(mass > 0.0) {
            continue;
        }
        let inv = 1.0 / mass;
        for (r, slot) in phi.iter_mut().enumerate() {
            let mut v = 0.0;
            for j in 0..n {
                v += trans[(r, j)] * post[j];
            }
            *slot = v * inv;
        }
        total += mass * read(next_values, grid, &phi, mode, fallbacks);
    }
    total
}

/// Expected next-stage cost for one belief and control.
pub fn expected_future_cost(
    prediction: &Belief,
    chain: &MarkovChain,
    kernels: &KernelSet,
    next: &ValueTable,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let channel = build_channel(kernels, quad)?;
    let mut fb = 0;
    Ok(expected_with_channel(
        prediction.as_slice(),
        chain,
        &channel,
        &next.values,
        &next.grid,
        Interpolation::Barycentric,
        &mut fb,
    ))
}

/// Finite-horizon backward induction over the grid.
pub fn backward_induction(scenario: &Scenario, grid: Arc<BeliefGrid>, opts: &DpOptions) -> Result<DpSolution> {
    if grid.n() != scenario.n() {
        return Err(Error::DimensionMismatch(format!(
            "grid has {} states but the scenario has {}",
            grid.n(),
            scenario.n()
        )));
    }
    let horizon = scenario.horizon;
    let nu = scenario.num_controls();
    let lambda = scenario.lambda;
    let channels = scenario
        .kernels
        .iter()
        .map(|k| build_channel(k, &opts.quad))
        .collect::<Result<Vec<_>>>()?;
    let stage_costs: Vec<Vec<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let b = Belief::from_vector_unchecked(grid.point_vector(i));
            (0..nu)
                .map(|u| current_cost(&b, &scenario.kernels[u], scenario.controls[u].cost, lambda))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values: Vec<ValueTable> = Vec::with_capacity(horizon);
    let mut policies: Vec<PolicyTable> = Vec::with_capacity(horizon);
    let mut fallbacks = 0usize;
    for stage in (1..=horizon).rev() {
        let next = values.last().map(|t| t.values.as_slice());
        let rows: Vec<(f64, usize, usize)> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let p = grid.point(i);
                let mut best = (f64::INFINITY, 0usize);
                let mut fb = 0usize;
                for u in 0..nu {
                    let mut v = stage_costs[i][u];
                    if let Some(nv) = next {
                        v += expected_with_channel(p, &scenario.chain, &channels[u], nv, &grid, opts.interpolation, &mut fb);
                    }
                    if v < best.0 {
                        best = (v, u);
                    }
                }
                (best.0, best.1, fb)
            })
            .collect();
        fallbacks += rows.iter().map(|r| r.2).sum::<usize>();
        values.push(ValueTable::new(stage, rows.iter().map(|r| r.0).collect(), grid.clone()));
        policies.push(PolicyTable { stage, choice: rows.iter().map(|r| r.1).collect() });
    }
    values.reverse();
    policies.reverse();
    Ok(DpSolution { grid, values, policies, fallbacks })
}
