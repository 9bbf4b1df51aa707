//! Scenario documents in TOML.
//!
//! ```toml
//! lambda = 0.5
//! horizon = 5
//! initial_control = 0          # optional, defaults to the cheapest non-empty control
//!
//! [chain]
//! columns = [[0.9, 0.1], [0.1, 0.9]]   # columns[i][j] = P(next = j | current = i)
//! prior = [0.5, 0.5]
//!
//! # Either sensors with a sample budget ...
//! [sensing]
//! budget = 2
//! normalizer = 2.0             # optional, defaults to budget * max(delta)
//! include_empty = false        # optional
//!
//! [[sensing.sensors]]
//! name = "a"
//! mu = [0.0, 1.0]
//! sigma2 = [0.5, 0.5]
//! phi = 0.3
//! sigma_z2 = 0.1
//! delta = 0.585
//!
//! # ... or explicit controls, one kernel per state.
//! [[controls]]
//! cost = 0.2
//! means = [[0.0], [1.0]]
//! covariances = [[[1.0]], [[2.0]]]
//! ```

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ExplicitControl, GaussianKernel, MarkovChain, ObservationSource, Scenario, SensorSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub lambda: f64,
    pub horizon: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_control: Option<usize>,
    pub chain: ChainDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensing: Option<SensingDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub controls: Vec<ControlDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainDoc {
    pub columns: Vec<Vec<f64>>,
    pub prior: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensingDoc {
    pub budget: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalizer: Option<f64>,
    #[serde(default)]
    pub include_empty: bool,
    pub sensors: Vec<SensorDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorDoc {
    pub name: String,
    pub mu: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub phi: f64,
    pub sigma_z2: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlDoc {
    pub cost: f64,
    pub means: Vec<Vec<f64>>,
    pub covariances: Vec<Vec<Vec<f64>>>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn quoted_field(message: &str) -> String {
    message.split('`').nth(1).unwrap_or("").to_string()
}

fn parse_error(text: &str, e: toml::de::Error) -> Error {
    let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(0);
    let message = e.message().trim().to_string();
    Error::ParseError { line, field: quoted_field(&message), message }
}

fn validation(e: Error) -> Error {
    match e {
        Error::ValidationError { .. } | Error::ParseError { .. } => e,
        other => Error::ValidationError { invariant: other.invariant().to_string(), message: other.to_string() },
    }
}

/// Syntax-level parse without model validation.
pub fn parse_doc(text: &str) -> Result<ScenarioDoc> {
    toml::from_str(text).map_err(|e| parse_error(text, e))
}

fn kernel_from(mean: &[f64], cov: &[Vec<f64>]) -> Result<GaussianKernel> {
    let d = mean.len();
    if cov.len() != d || cov.iter().any(|r| r.len() != d) {
        return Err(Error::DimensionMismatch(format!("covariance must be {d}x{d}")));
    }
    GaussianKernel::new(DVector::from_column_slice(mean), DMatrix::from_fn(d, d, |r, c| cov[r][c]))
}

impl ScenarioDoc {
    /// Build and validate the scenario.
    pub fn to_scenario(&self) -> Result<Scenario> {
        self.build().map_err(validation)
    }

    fn build(&self) -> Result<Scenario> {
        let chain = MarkovChain::from_columns(&self.chain.columns, &self.chain.prior)?;
        match (&self.sensing, self.controls.is_empty()) {
            (Some(s), true) => {
                let sensors = s
                    .sensors
                    .iter()
                    .map(|d| SensorSpec {
                        name: d.name.clone(),
                        mu: d.mu.clone(),
                        sigma2: d.sigma2.clone(),
                        phi: d.phi,
                        sigma_z2: d.sigma_z2,
                        delta: d.delta,
                    })
                    .collect();
                Scenario::from_sensors(
                    chain,
                    sensors,
                    s.budget,
                    s.normalizer,
                    s.include_empty,
                    self.lambda,
                    self.horizon,
                    self.initial_control,
                )
            }
            (None, false) => {
                let controls = self
                    .controls
                    .iter()
                    .enumerate()
                    .map(|(u, c)| {
                        if c.means.len() != c.covariances.len() {
                            return Err(Error::DimensionMismatch(format!(
                                "control {u}: {} means but {} covariances",
                                c.means.len(),
                                c.covariances.len()
                            )));
                        }
                        let kernels = c
                            .means
                            .iter()
                            .zip(&c.covariances)
                            .map(|(m, q)| kernel_from(m, q))
                            .collect::<Result<Vec<_>>>()?;
                        Ok(ExplicitControl { cost: c.cost, kernels })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Scenario::from_explicit(chain, controls, self.lambda, self.horizon, self.initial_control)
            }
            (Some(_), false) => {
                Err(Error::InvalidScenario("give either [sensing] or [[controls]], not both".into()))
            }
            (None, true) => Err(Error::InvalidScenario("no [sensing] table and no [[controls]]".into())),
        }
    }

    /// Document describing an existing scenario.
    pub fn from_scenario(s: &Scenario) -> Self {
        let chain = ChainDoc { columns: s.chain.columns(), prior: s.chain.prior().as_slice().to_vec() };
        let (sensing, controls) = match &s.source {
            ObservationSource::Sensors { sensors, budget, normalizer, include_empty } => (
                Some(SensingDoc {
                    budget: *budget,
                    normalizer: *normalizer,
                    include_empty: *include_empty,
                    sensors: sensors
                        .iter()
                        .map(|x| SensorDoc {
                            name: x.name.clone(),
                            mu: x.mu.clone(),
                            sigma2: x.sigma2.clone(),
                            phi: x.phi,
                            sigma_z2: x.sigma_z2,
                            delta: x.delta,
                        })
                        .collect(),
                }),
                Vec::new(),
            ),
            ObservationSource::Explicit => (
                None,
                s.controls
                    .iter()
                    .zip(&s.kernels)
                    .map(|(c, ks)| ControlDoc {
                        cost: c.cost,
                        means: ks.kernels().iter().map(|k| k.mean().as_slice().to_vec()).collect(),
                        covariances: ks
                            .kernels()
                            .iter()
                            .map(|k| k.cov().row_iter().map(|r| r.iter().copied().collect()).collect())
                            .collect(),
                    })
                    .collect(),
            ),
        };
        Self { lambda: s.lambda, horizon: s.horizon, initial_control: s.initial_control, chain, sensing, controls }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario documents always serialize")
    }
}

/// Parse and fully validate a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    parse_doc(text)?.to_scenario()
}

/// Canonical text of a scenario.
pub fn serialize_scenario(s: &Scenario) -> String {
    ScenarioDoc::from_scenario(s).to_toml()
}

/// Canonical text of a document (comments, ordering and number formatting normalized).
pub fn canonicalize(text: &str) -> Result<String> {
    Ok(parse_doc(text)?.to_toml())
}

pub fn load_scenario(path: &std::path::Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text)
}
