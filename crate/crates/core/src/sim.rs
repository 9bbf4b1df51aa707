//! Episode simulation, Monte Carlo metrics, λ sweeps and built-in scenarios.

use std::hash::{Hash, Hasher};

use nalgebra::DVector;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{bayes_correct, kalman_update, predict, Belief};
use crate::model::{ExplicitControl, GaussianKernel, MarkovChain, Scenario, SensorSpec};
use crate::strategy::{ce_wwlb_plan, decide, StrategyKind, StrategySpec};

/// Half-width multiplier of the normal confidence intervals.
pub const CI_Z: f64 = 1.96;

/// Which posterior the detection metric takes its argmax from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Detection {
    #[default]
    Kalman,
    Bayes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimOptions {
    pub detection: Detection,
}

/// One stage `k ∈ 1..=L` of an episode.
#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub stage: usize,
    pub state: usize,
    pub control: usize,
    pub obs_hash: u64,
    /// Kalman-like posterior `p_{k|k}`.
    pub posterior: Vec<f64>,
    /// Bayes predicted belief the decision was made from.
    pub prediction: Vec<f64>,
    /// Exact Bayes posterior `p_{k|k}`.
    pub bayes_posterior: Vec<f64>,
    pub trace_mse: f64,
    pub stage_cost: f64,
    pub detected: usize,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub seed: u64,
    pub index: u64,
    pub initial_state: usize,
    pub stages: Vec<StageRecord>,
}

impl EpisodeRecord {
    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    fn mean(&self, f: impl Fn(&StageRecord) -> f64) -> f64 {
        self.stages.iter().map(f).sum::<f64>() / self.stages.len() as f64
    }

    pub fn amse(&self) -> f64 {
        self.mean(|s| s.trace_mse)
    }

    pub fn adp(&self) -> f64 {
        self.mean(|s| if s.detected == s.state { 1.0 } else { 0.0 })
    }

    pub fn aec(&self) -> f64 {
        self.mean(|s| s.energy)
    }

    pub fn total_cost(&self) -> f64 {
        self.stages.iter().map(|s| s.stage_cost).sum()
    }
}

/// Monte Carlo averages for one (scenario, strategy, λ).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub strategy: String,
    pub lambda: f64,
    pub amse: f64,
    pub amse_ci: f64,
    pub adp: f64,
    pub adp_ci: f64,
    pub aec: f64,
    pub aec_ci: f64,
    pub runs: usize,
    pub horizon: usize,
    pub seed: u64,
    /// Fraction of all requested samples that went to each sensor.
    pub sensor_share: Option<Vec<f64>>,
}

/// Per-episode generator from a master seed and an episode index.
pub fn episode_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn hash_observation(y: &DVector<f64>) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for v in y.iter() {
        v.to_bits().hash(&mut h);
    }
    h.finish()
}

/// Prepared simulation of one strategy on one scenario.
pub struct Simulator<'a> {
    scenario: &'a Scenario,
    strategy: &'a StrategyKind,
    plan: Option<Vec<usize>>,
    transitions: Vec<WeightedIndex<f64>>,
    prior: WeightedIndex<f64>,
    options: SimOptions,
}

fn weighted(w: &[f64]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(w).map_err(|e| Error::InvalidScenario(format!("sampling weights: {e}")))
}

impl<'a> Simulator<'a> {
    /// CE-WWLB plans are belief independent and computed once here.
    pub fn new(scenario: &'a Scenario, strategy: &'a StrategyKind, options: SimOptions) -> Result<Self> {
        let plan = match strategy {
            StrategyKind::CeWwlb(planner) => {
                Some(ce_wwlb_plan(planner, scenario)?.into_iter().map(|c| c.control).collect())
            }
            _ => None,
        };
        let transitions = scenario.chain.columns().iter().map(|c| weighted(c)).collect::<Result<Vec<_>>>()?;
        let prior = weighted(scenario.chain.prior().as_slice())?;
        Ok(Self { scenario, strategy, plan, transitions, prior, options })
    }

    fn choose(&self, prediction: &Belief, stage: usize) -> Result<usize> {
        match &self.plan {
            Some(plan) => Ok(plan[stage - 1]),
            None => decide(self.strategy, prediction, stage, self.scenario, None),
        }
    }

    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R, seed: u64, index: u64) -> Result<EpisodeRecord> {
        let sc = self.scenario;
        let chain: &MarkovChain = &sc.chain;
        let lambda = sc.lambda;
        let mut state = self.prior.sample(rng);
        let initial_state = state;
        let u0 = sc.initial_control_id();
        let ks0 = sc.kernel_set(u0)?;
        let y0 = ks0.kernel(state).sample(rng);
        let prior = Belief::new(chain.prior().clone())?;
        let mut kalman = kalman_update(&prior, ks0, &y0)?.posterior;
        let mut bayes = bayes_correct(&prior, ks0, &y0)?;
        let mut stages = Vec::with_capacity(sc.horizon);
        for stage in 1..=sc.horizon {
            let bayes_pred = predict(chain, &bayes);
            let u = self.choose(&bayes_pred, stage)?;
            state = self.transitions[state].sample(rng);
            let ks = sc.kernel_set(u)?;
            let y = ks.kernel(state).sample(rng);
            let fs = kalman_update(&predict(chain, &kalman), ks, &y)?;
            bayes = bayes_correct(&bayes_pred, ks, &y)?;
            kalman = fs.posterior;
            let trace_mse = kalman.trace_mse();
            let detected = match self.options.detection {
                Detection::Kalman => kalman.argmax(),
                Detection::Bayes => bayes.argmax(),
            };
            stages.push(StageRecord {
                stage,
                state,
                control: u,
                obs_hash: hash_observation(&y),
                posterior: kalman.as_slice().to_vec(),
                prediction: bayes_pred.as_slice().to_vec(),
                bayes_posterior: bayes.as_slice().to_vec(),
                trace_mse,
                stage_cost: (1.0 - lambda) * trace_mse + lambda * sc.cost(u),
                detected,
                energy: sc.energy(u),
            });
        }
        Ok(EpisodeRecord { seed, index, initial_state, stages })
    }
}

/// Simulate one episode with the given generator.
pub fn run_episode<R: Rng + ?Sized>(scenario: &Scenario, strategy: &StrategyKind, rng: &mut R) -> Result<EpisodeRecord> {
    Simulator::new(scenario, strategy, SimOptions::default())?.run(rng, 0, 0)
}

fn mean_ci(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, CI_Z * var.sqrt() / k.sqrt())
}

/// All `runs` episodes of a strategy, in index order.
pub fn simulate_episodes(
    scenario: &Scenario,
    strategy: &StrategyKind,
    runs: usize,
    seed: u64,
    options: SimOptions,
) -> Result<Vec<EpisodeRecord>> {
    let sim = Simulator::new(scenario, strategy, options)?;
    (0..runs as u64)
        .into_par_iter()
        .map(|i| sim.run(&mut episode_rng(seed, i), seed, i))
        .collect()
}

/// Aggregate metrics over episodes.
pub fn summarize(scenario: &Scenario, label: &str, seed: u64, episodes: &[EpisodeRecord]) -> MetricsReport {
    let amse: Vec<f64> = episodes.iter().map(EpisodeRecord::amse).collect();
    let adp: Vec<f64> = episodes.iter().map(EpisodeRecord::adp).collect();
    let aec: Vec<f64> = episodes.iter().map(EpisodeRecord::aec).collect();
    let sensor_share = (scenario.num_sensors() > 0).then(|| {
        let mut totals = vec![0.0; scenario.num_sensors()];
        for e in episodes {
            for s in &e.stages {
                if let Some(a) = &scenario.controls[s.control].allocation {
                    for (t, &c) in totals.iter_mut().zip(a) {
                        *t += c as f64;
                    }
                }
            }
        }
        let sum: f64 = totals.iter().sum();
        totals.iter().map(|t| if sum > 0.0 { t / sum } else { 0.0 }).collect()
    });
    let (amse, amse_ci) = mean_ci(&amse);
    let (adp, adp_ci) = mean_ci(&adp);
    let (aec, aec_ci) = mean_ci(&aec);
    MetricsReport {
        strategy: label.to_string(),
        lambda: scenario.lambda,
        amse,
        amse_ci,
        adp,
        adp_ci,
        aec,
        aec_ci,
        runs: episodes.len(),
        horizon: scenario.horizon,
        seed,
        sensor_share,
    }
}

/// AMSE, ADP and AEC averaged over runs and stages.
pub fn monte_carlo(scenario: &Scenario, strategy: &StrategyKind, runs: usize, seed: u64) -> Result<MetricsReport> {
    monte_carlo_with(scenario, strategy, runs, seed, SimOptions::default())
}

pub fn monte_carlo_with(
    scenario: &Scenario,
    strategy: &StrategyKind,
    runs: usize,
    seed: u64,
    options: SimOptions,
) -> Result<MetricsReport> {
    if runs == 0 {
        return Err(Error::InvalidScenario("at least one run is required".into()));
    }
    let episodes = simulate_episodes(scenario, strategy, runs, seed, options)?;
    Ok(summarize(scenario, &strategy.label(), seed, &episodes))
}

/// `0, 0.1, …, 1`.
pub fn default_lambdas() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

/// One report per (λ, strategy), ordered by λ then by position in `family`.
pub fn sweep_lambda(
    scenario: &Scenario,
    family: &[StrategySpec],
    lambdas: &[f64],
    runs: usize,
    seed: u64,
    options: SimOptions,
) -> Result<Vec<MetricsReport>> {
    let mut rows = Vec::with_capacity(lambdas.len() * family.len());
    for &lambda in lambdas {
        let sc = scenario.with_lambda(lambda)?;
        for spec in family {
            let strategy = spec.build(&sc)?;
            rows.push(monte_carlo_with(&sc, &strategy, runs, seed, options)?);
        }
    }
    Ok(rows)
}

/// Result of searching λ so a strategy's detection rate hits a target.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaMatch {
    pub lambda: f64,
    pub report: MetricsReport,
    /// Every evaluated point, in evaluation order.
    pub trace: Vec<MetricsReport>,
}

/// Bisection on λ for `|ADP − target| ≤ tol`, assuming ADP non-increasing in λ.
///
/// Returns the evaluated point closest to the target when the tolerance is never met.
pub fn match_lambda_by_adp(
    scenario: &Scenario,
    spec: &StrategySpec,
    target: f64,
    tol: f64,
    runs: usize,
    seed: u64,
    max_iter: usize,
) -> Result<LambdaMatch> {
    let eval = |lambda: f64| -> Result<MetricsReport> {
        let sc = scenario.with_lambda(lambda)?;
        monte_carlo(&sc, &spec.build(&sc)?, runs, seed)
    };
    let mut trace = Vec::new();
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for lambda in [lo, hi] {
        trace.push(eval(lambda)?);
    }
    let hit = |r: &MetricsReport| (r.adp - target).abs() <= tol;
    if !hit(&trace[0]) && !hit(&trace[1]) && trace[0].adp > target && trace[1].adp < target {
        for _ in 0..max_iter {
            let mid = 0.5 * (lo + hi);
            let r = eval(mid)?;
            let done = hit(&r);
            let above = r.adp > target;
            trace.push(r);
            if done {
                break;
            }
            if above {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let best = trace
        .iter()
        .filter(|r| hit(r))
        .min_by(|a, b| a.aec.total_cmp(&b.aec))
        .or_else(|| trace.iter().min_by(|a, b| (a.adp - target).abs().total_cmp(&(b.adp - target).abs())))
        .cloned()
        .expect("at least two evaluations");
    Ok(LambdaMatch { lambda: best.lambda, report: best, trace })
}

/// Built-in scenario families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Two states, four scalar controls, one per Case I–IV.
    TwoStateScalar,
    /// Two states, two Case IV controls with equal separation and cost crossing at `p* = 1/3`.
    Crossing,
    /// Two states, two scalar AR sensors, budget 2.
    TwoSensor,
    /// Four activity-like states, three AR sensors, budget 12; the third sensor is nearly uninformative.
    BodySensingLike,
}

impl ScenarioKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "two_state_scalar" => Ok(Self::TwoStateScalar),
            "crossing" => Ok(Self::Crossing),
            "two_sensor" => Ok(Self::TwoSensor),
            "body_sensing_like" => Ok(Self::BodySensingLike),
            _ => Err(Error::InvalidScenario(format!("unknown scenario kind '{s}'"))),
        }
    }
}

/// Optional changes to a built-in scenario.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Overrides {
    pub lambda: Option<f64>,
    pub horizon: Option<usize>,
    pub self_transition: Option<f64>,
    pub budget: Option<usize>,
}

/// Chain with equal self-transition `a` and uniform off-diagonal mass, uniform prior.
pub fn sticky_chain(n: usize, a: f64) -> Result<MarkovChain> {
    let off = if n > 1 { (1.0 - a) / (n - 1) as f64 } else { 0.0 };
    let cols: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { a } else { off }).collect()).collect();
    MarkovChain::from_columns(&cols, &vec![1.0 / n as f64; n])
}

fn scalar_control(m: (f64, f64), v: (f64, f64), cost: f64) -> Result<ExplicitControl> {
    Ok(ExplicitControl { cost, kernels: vec![GaussianKernel::scalar(m.0, v.0)?, GaussianKernel::scalar(m.1, v.1)?] })
}

fn sensor(name: &str, mu: &[f64], sigma2: &[f64], phi: f64, sigma_z2: f64, delta: f64) -> SensorSpec {
    SensorSpec { name: name.into(), mu: mu.to_vec(), sigma2: sigma2.to_vec(), phi, sigma_z2, delta }
}

/// Reception costs of the three body sensors.
pub const BODY_DELTAS: [f64; 3] = [0.585, 0.776, 1.0];

/// Built-in scenario.
pub fn default_scenario(kind: ScenarioKind, overrides: Overrides) -> Result<Scenario> {
    let lambda = overrides.lambda.unwrap_or(0.5);
    match kind {
        ScenarioKind::TwoStateScalar => {
            let horizon = overrides.horizon.unwrap_or(5);
            let chain = sticky_chain(2, overrides.self_transition.unwrap_or(0.9))?;
            let controls = vec![
                scalar_control((0.0, 0.0), (1.0, 1.0), 0.0)?,
                scalar_control((0.0, 0.0), (0.25, 2.0), 0.2)?,
                scalar_control((0.0, 1.5), (1.0, 1.0), 0.5)?,
                scalar_control((0.0, 2.5), (0.5, 1.5), 0.9)?,
            ];
            Scenario::from_explicit(chain, controls, lambda, horizon, None)
        }
        ScenarioKind::Crossing => {
            let horizon = overrides.horizon.unwrap_or(5);
            let chain = sticky_chain(2, overrides.self_transition.unwrap_or(0.9))?;
            let controls = vec![
                scalar_control((0.0, 1.0), (2.0, 1.0), 0.5)?,
                scalar_control((0.0, 1.0), (1.0, 1.5), 0.5)?,
            ];
            Scenario::from_explicit(chain, controls, lambda, horizon, None)
        }
        ScenarioKind::TwoSensor => {
            let horizon = overrides.horizon.unwrap_or(5);
            let chain = sticky_chain(2, overrides.self_transition.unwrap_or(0.8))?;
            let sensors = vec![
                sensor("a", &[0.0, 0.8], &[0.9, 0.9], 0.3, 0.1, 0.585),
                sensor("b", &[0.0, 3.0], &[0.9, 1.2], 0.3, 0.1, 1.0),
            ];
            Scenario::from_sensors(chain, sensors, overrides.budget.unwrap_or(2), None, false, lambda, horizon, None)
        }
        ScenarioKind::BodySensingLike => {
            let horizon = overrides.horizon.unwrap_or(5);
            let chain = sticky_chain(4, overrides.self_transition.unwrap_or(0.9))?;
            let [da, db, dc] = BODY_DELTAS;
            let sensors = vec![
                sensor("accel-a", &[0.0, 0.0, 1.0, 1.0], &[0.8, 0.8, 0.8, 0.8], 0.5, 0.1, da),
                sensor("accel-b", &[0.0, 1.0, 0.0, 1.0], &[0.8, 0.8, 0.8, 0.8], 0.5, 0.1, db),
                sensor("ecg", &[0.0, 0.05, 0.1, 0.15], &[1.0, 1.0, 1.0, 1.0], 0.5, 0.1, dc),
            ];
            Scenario::from_sensors(chain, sensors, overrides.budget.unwrap_or(12), None, false, lambda, horizon, None)
        }
    }
}
