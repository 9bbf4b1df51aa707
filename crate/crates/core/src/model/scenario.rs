use super::chain::MarkovChain;
use super::control::{enumerate_controls, Control};
use super::kernel::{GaussianKernel, KernelSet};
use super::sensor::{build_observation_model, energy, sensing_cost, SensorSpec};
use crate::error::{Error, Result};

/// Where the control set and kernels come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ObservationSource {
    /// Controls enumerated from sample allocations over AR sensors.
    Sensors {
        sensors: Vec<SensorSpec>,
        budget: usize,
        normalizer: Option<f64>,
        include_empty: bool,
    },
    /// Controls given directly with their kernels and costs.
    Explicit,
}

/// Complete tracking problem: chain, controls, kernels, trade-off weight and horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub chain: MarkovChain,
    pub source: ObservationSource,
    pub controls: Vec<Control>,
    pub kernels: Vec<KernelSet>,
    pub lambda: f64,
    pub horizon: usize,
    pub initial_control: Option<usize>,
}

/// Explicit control definition: cost plus one kernel per state.
#[derive(Debug, Clone)]
pub struct ExplicitControl {
    pub cost: f64,
    pub kernels: Vec<GaussianKernel>,
}

fn check_common(lambda: f64, horizon: usize) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    if horizon == 0 {
        return Err(Error::InvalidScenario("horizon must be at least 1".into()));
    }
    Ok(())
}

impl Scenario {
    /// Scenario whose controls are all sample allocations within the budget.
    #[allow(clippy::too_many_arguments)]
    pub fn from_sensors(
        chain: MarkovChain,
        sensors: Vec<SensorSpec>,
        budget: usize,
        normalizer: Option<f64>,
        include_empty: bool,
        lambda: f64,
        horizon: usize,
        initial_control: Option<usize>,
    ) -> Result<Self> {
        check_common(lambda, horizon)?;
        let n = chain.n();
        if sensors.is_empty() {
            return Err(Error::InvalidScenario("at least one sensor is required".into()));
        }
        for s in &sensors {
            s.validate(n)?;
        }
        let deltas: Vec<f64> = sensors.iter().map(|s| s.delta).collect();
        let c = normalizer.unwrap_or_else(|| budget as f64 * deltas.iter().cloned().fold(0.0, f64::max));
        let allocations = enumerate_controls(sensors.len(), budget, include_empty)?;
        let mut controls = Vec::with_capacity(allocations.len());
        let mut kernels = Vec::with_capacity(allocations.len());
        for (id, a) in allocations.into_iter().enumerate() {
            let cost = if a.iter().all(|&v| v == 0) { 0.0 } else { sensing_cost(&a, &deltas, c)? };
            kernels.push(KernelSet::new(build_observation_model(&sensors, &a)?)?);
            controls.push(Control::new(id, Some(a), cost)?);
        }
        let s = Self {
            chain,
            source: ObservationSource::Sensors { sensors, budget, normalizer, include_empty },
            controls,
            kernels,
            lambda,
            horizon,
            initial_control,
        };
        s.check_initial()?;
        Ok(s)
    }

    /// Scenario with explicitly listed controls.
    pub fn from_explicit(
        chain: MarkovChain,
        controls: Vec<ExplicitControl>,
        lambda: f64,
        horizon: usize,
        initial_control: Option<usize>,
    ) -> Result<Self> {
        check_common(lambda, horizon)?;
        if controls.is_empty() {
            return Err(Error::InvalidScenario("at least one control is required".into()));
        }
        let n = chain.n();
        let mut out_controls = Vec::with_capacity(controls.len());
        let mut kernels = Vec::with_capacity(controls.len());
        for (id, c) in controls.into_iter().enumerate() {
            if c.kernels.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "control {id} defines {} kernels for {n} states",
                    c.kernels.len()
                )));
            }
            out_controls.push(Control::new(id, None, c.cost)?);
            kernels.push(KernelSet::new(c.kernels)?);
        }
        let s = Self {
            chain,
            source: ObservationSource::Explicit,
            controls: out_controls,
            kernels,
            lambda,
            horizon,
            initial_control,
        };
        s.check_initial()?;
        Ok(s)
    }

    fn check_initial(&self) -> Result<()> {
        match self.initial_control {
            Some(u) if u >= self.controls.len() => Err(Error::UnknownControl(u)),
            _ => Ok(()),
        }
    }

    pub fn n(&self) -> usize {
        self.chain.n()
    }

    pub fn num_controls(&self) -> usize {
        self.controls.len()
    }

    pub fn control(&self, u: usize) -> Result<&Control> {
        self.controls.get(u).ok_or(Error::UnknownControl(u))
    }

    pub fn kernel_set(&self, u: usize) -> Result<&KernelSet> {
        self.kernels.get(u).ok_or(Error::UnknownControl(u))
    }

    pub fn cost(&self, u: usize) -> f64 {
        self.controls[u].cost
    }

    /// Same scenario with a different trade-off weight.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::LambdaOutOfRange(lambda));
        }
        let mut s = self.clone();
        s.lambda = lambda;
        Ok(s)
    }

    /// Same scenario with a different horizon.
    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        check_common(self.lambda, horizon)?;
        let mut s = self.clone();
        s.horizon = horizon;
        Ok(s)
    }

    /// Cheapest control with a non-empty observation (ties to the lowest id).
    pub fn cheapest_control(&self) -> usize {
        let mut best: Option<usize> = None;
        for (u, c) in self.controls.iter().enumerate() {
            if self.kernels[u].dim() == 0 {
                continue;
            }
            if best.is_none_or(|b| c.cost < self.controls[b].cost) {
                best = Some(u);
            }
        }
        best.unwrap_or(0)
    }

    /// Fixed control for the observation at time zero.
    pub fn initial_control_id(&self) -> usize {
        self.initial_control.unwrap_or_else(|| self.cheapest_control())
    }

    /// Per-sensor reception costs, when the scenario is sensor based.
    pub fn deltas(&self) -> Option<Vec<f64>> {
        match &self.source {
            ObservationSource::Sensors { sensors, .. } => Some(sensors.iter().map(|s| s.delta).collect()),
            ObservationSource::Explicit => None,
        }
    }

    /// Energy of a control: `allocationᵀδ` for sensor scenarios, else the normalized cost.
    pub fn energy(&self, u: usize) -> f64 {
        match (&self.source, &self.controls[u].allocation) {
            (ObservationSource::Sensors { sensors, .. }, Some(a)) => {
                let d: Vec<f64> = sensors.iter().map(|s| s.delta).collect();
                energy(a, &d)
            }
            _ => self.controls[u].cost,
        }
    }

    /// Id of the control with exactly this allocation.
    pub fn find_allocation(&self, allocation: &[usize]) -> Option<usize> {
        self.controls.iter().position(|c| c.allocation.as_deref() == Some(allocation))
    }

    pub fn num_sensors(&self) -> usize {
        match &self.source {
            ObservationSource::Sensors { sensors, .. } => sensors.len(),
            ObservationSource::Explicit => 0,
        }
    }
}
