//! Uniform decision interface over DP-optimal, myopic, CE-WWLB, equal-allocation and fixed strategies.

use std::sync::Arc;

use crate::cost::{current_cost_2state_scalar, mse_term_trace, AllocationMse, ScalarPair};
use crate::dp::{backward_induction, build_grid, compress_intervals, DpOptions, DpSolution, ThresholdReport};
use crate::error::{Error, Result};
use crate::estimator::Belief;
use crate::model::Scenario;
use crate::wwlb::{
    advance, all_pairs, enumerate_test_points, v_score, Negation, TestPoint, TestPointSet, VScore, WwlbAccumulator,
    WwlbMode, WwlbProblem,
};

/// Settings of the cost-efficient WWLB strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CeWwlbConfig {
    pub test_points: TestPointSet,
    pub mode: WwlbMode,
    pub negation: Negation,
}

impl Default for CeWwlbConfig {
    fn default() -> Self {
        Self { test_points: TestPointSet::All, mode: WwlbMode::Exact, negation: Negation::Reverse }
    }
}

/// Precomputed bound problem and candidate test-point pairs.
#[derive(Debug, Clone)]
pub struct CeWwlbPlanner {
    pub problem: WwlbProblem,
    pub pairs: Vec<(TestPoint, TestPoint)>,
    pub config: CeWwlbConfig,
}

impl CeWwlbPlanner {
    pub fn new(scenario: &Scenario, config: CeWwlbConfig) -> Result<Self> {
        let problem = WwlbProblem::from_scenario(scenario, config.mode, config.negation)?;
        let points = enumerate_test_points(scenario.n(), config.test_points);
        if points.is_empty() {
            return Err(Error::AllTestPointsDegenerate);
        }
        Ok(Self { problem, pairs: all_pairs(&points), config })
    }
}

/// A CE-WWLB decision with the pair that achieved its score.
#[derive(Debug, Clone, PartialEq)]
pub struct CeChoice {
    pub control: usize,
    pub score: VScore,
}

/// Available strategies.
#[derive(Debug, Clone)]
pub enum StrategyKind {
    DpOptimal(Arc<DpSolution>),
    /// Optionally carries the fast evaluator for sensor-allocation scenarios.
    Myopic(Option<Arc<AllocationMse>>),
    CeWwlb(Arc<CeWwlbPlanner>),
    EqualAllocation { per_sensor: usize, control: usize },
    Fixed(usize),
}

impl StrategyKind {
    pub fn myopic(scenario: &Scenario) -> Self {
        Self::Myopic(AllocationMse::new(scenario).map(Arc::new))
    }

    pub fn ce_wwlb(scenario: &Scenario, config: CeWwlbConfig) -> Result<Self> {
        Ok(Self::CeWwlb(Arc::new(CeWwlbPlanner::new(scenario, config)?)))
    }

    /// Equal allocation of `per_sensor` samples to every sensor.
    pub fn equal_allocation(scenario: &Scenario, per_sensor: usize) -> Result<Self> {
        let s = scenario.num_sensors();
        if s == 0 {
            return Err(Error::InvalidScenario("equal allocation needs a sensor-based scenario".into()));
        }
        let alloc = vec![per_sensor; s];
        let control = scenario
            .find_allocation(&alloc)
            .ok_or_else(|| Error::InfeasibleAllocation(format!("{alloc:?} is not within the budget")))?;
        Ok(Self::EqualAllocation { per_sensor, control })
    }

    pub fn fixed(scenario: &Scenario, control: usize) -> Result<Self> {
        scenario.control(control)?;
        Ok(Self::Fixed(control))
    }

    pub fn label(&self) -> String {
        match self {
            Self::DpOptimal(_) => "dp".into(),
            Self::Myopic(_) => "myopic".into(),
            Self::CeWwlb(_) => "ce-wwlb".into(),
            Self::EqualAllocation { per_sensor, .. } => format!("ea{per_sensor}"),
            Self::Fixed(u) => format!("fixed{u}"),
        }
    }

    pub fn needs_accumulator(&self) -> bool {
        matches!(self, Self::CeWwlb(_))
    }
}

/// Recipe for a strategy, instantiated per scenario (and hence per λ).
#[derive(Debug, Clone, PartialEq)]
pub enum StrategySpec {
    Dp { resolution: usize, options: DpOptions },
    Myopic,
    CeWwlb(CeWwlbConfig),
    EqualAllocation(usize),
    Fixed(usize),
}

impl StrategySpec {
    pub fn build(&self, scenario: &Scenario) -> Result<StrategyKind> {
        match self {
            Self::Dp { resolution, options } => {
                let grid = Arc::new(build_grid(scenario.n(), *resolution)?);
                Ok(StrategyKind::DpOptimal(Arc::new(backward_induction(scenario, grid, options)?)))
            }
            Self::Myopic => Ok(StrategyKind::myopic(scenario)),
            Self::CeWwlb(cfg) => StrategyKind::ce_wwlb(scenario, *cfg),
            Self::EqualAllocation(k) => StrategyKind::equal_allocation(scenario, *k),
            Self::Fixed(u) => StrategyKind::fixed(scenario, *u),
        }
    }

    /// Parse `dp`, `myopic`, `ce-wwlb`, `ea:<count>` or `fixed:<id>`.
    pub fn parse(text: &str, resolution: usize, options: DpOptions, wwlb: CeWwlbConfig) -> Result<Self> {
        let t = text.trim();
        let (head, arg) = match t.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (t, None),
        };
        let number = |what: &str| -> Result<usize> {
            arg.ok_or_else(|| Error::InvalidScenario(format!("strategy '{t}' needs a {what}")))?
                .parse()
                .map_err(|_| Error::InvalidScenario(format!("strategy '{t}': bad {what}")))
        };
        match head {
            "dp" => Ok(Self::Dp { resolution, options }),
            "myopic" => Ok(Self::Myopic),
            "ce-wwlb" | "cewwlb" => Ok(Self::CeWwlb(wwlb)),
            "ea" => Ok(Self::EqualAllocation(number("per-sensor count")?)),
            "fixed" => Ok(Self::Fixed(number("control id")?)),
            _ => Err(Error::InvalidScenario(format!("unknown strategy '{t}'"))),
        }
    }
}

/// Control minimizing the current cost at `prediction` (ties to the lowest id).
pub fn myopic_choice(scenario: &Scenario, prediction: &Belief) -> Result<usize> {
    let p = prediction.probs();
    let lambda = scenario.lambda;
    let mut best = (f64::INFINITY, 0usize);
    for u in 0..scenario.num_controls() {
        let cost = scenario.controls[u].cost;
        let v = if lambda < 1.0 {
            (1.0 - lambda) * mse_term_trace(p, &scenario.kernels[u])? + lambda * cost
        } else {
            cost
        };
        if v < best.0 {
            best = (v, u);
        }
    }
    Ok(best.1)
}

/// Same as [`myopic_choice`] using the allocation evaluator.
pub fn myopic_choice_fast(eval: &AllocationMse, scenario: &Scenario, prediction: &Belief) -> Result<usize> {
    let lambda = scenario.lambda;
    let terms = if lambda < 1.0 { eval.mse_terms(prediction.probs(), scenario)? } else { vec![0.0; scenario.num_controls()] };
    let mut best = (f64::INFINITY, 0usize);
    for (u, t) in terms.iter().enumerate() {
        let v = if lambda < 1.0 { (1.0 - lambda) * t + lambda * scenario.controls[u].cost } else { scenario.controls[u].cost };
        if v < best.0 {
            best = (v, u);
        }
    }
    Ok(best.1)
}

/// CE-WWLB choice: `argmin_u (1−λ)v(u) + λc(u)` at the accumulator's stage.
pub fn ce_wwlb_choice(planner: &CeWwlbPlanner, scenario: &Scenario, accum: &WwlbAccumulator) -> Result<CeChoice> {
    let lambda = scenario.lambda;
    let mut best: Option<(f64, CeChoice)> = None;
    for u in 0..scenario.num_controls() {
        let Ok(score) = v_score(&planner.problem, accum, u, &planner.pairs) else { continue };
        let obj = (1.0 - lambda) * score.v + lambda * scenario.controls[u].cost;
        if best.as_ref().is_none_or(|b| obj < b.0) {
            best = Some((obj, CeChoice { control: u, score }));
        }
    }
    best.map(|b| b.1).ok_or(Error::AllTestPointsDegenerate)
}

/// Advance the accumulator with the chosen control and its maximizing pair.
pub fn commit(planner: &CeWwlbPlanner, accum: &WwlbAccumulator, choice: &CeChoice) -> Result<WwlbAccumulator> {
    let (h_k, h_k1) = &planner.pairs[choice.score.pair];
    Ok(advance(&planner.problem, accum, choice.control, h_k, h_k1)?.1)
}

/// Open-loop CE-WWLB control sequence `u_0, …, u_{L−1}` for stages `1..=L`.
pub fn ce_wwlb_plan(planner: &CeWwlbPlanner, scenario: &Scenario) -> Result<Vec<CeChoice>> {
    let mut accum = WwlbAccumulator::new(&planner.problem);
    let mut out = Vec::with_capacity(scenario.horizon);
    for _ in 0..scenario.horizon {
        let choice = ce_wwlb_choice(planner, scenario, &accum)?;
        accum = commit(planner, &accum, &choice)?;
        out.push(choice);
    }
    Ok(out)
}

/// Control for stage `stage ∈ [1, L]` given the predicted belief.
pub fn decide(
    strategy: &StrategyKind,
    prediction: &Belief,
    stage: usize,
    scenario: &Scenario,
    accum: Option<&WwlbAccumulator>,
) -> Result<usize> {
    if stage == 0 || stage > scenario.horizon {
        return Err(Error::StageOutOfRange { stage, horizon: scenario.horizon });
    }
    match strategy {
        StrategyKind::Myopic(fast) => match fast {
            Some(eval) if eval.num_controls() == scenario.num_controls() => {
                myopic_choice_fast(eval, scenario, prediction)
            }
            _ => myopic_choice(scenario, prediction),
        },
        StrategyKind::CeWwlb(planner) => {
            let acc = accum.ok_or(Error::MissingAccumulator)?;
            Ok(ce_wwlb_choice(planner, scenario, acc)?.control)
        }
        StrategyKind::DpOptimal(sol) => sol.policy_at(stage, prediction.as_slice()),
        StrategyKind::EqualAllocation { control, .. } => Ok(*control),
        StrategyKind::Fixed(u) => Ok(*u),
    }
}

/// Lower envelope of the per-control current costs on the certification grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MyopicThresholds {
    pub report: ThresholdReport,
    /// Controls that never attain the envelope.
    pub absent: Vec<usize>,
}

/// Myopic thresholds for a two-state scalar scenario.
pub fn myopic_thresholds(scenario: &Scenario) -> Result<MyopicThresholds> {
    if scenario.n() != 2 {
        return Err(Error::NotTwoStateScalar);
    }
    let pairs = scenario.kernels.iter().map(ScalarPair::from_kernels).collect::<Result<Vec<_>>>()?;
    let grid = crate::cost::cert_grid();
    let mut choice = Vec::with_capacity(grid.len());
    for &p in &grid {
        let mut best = (f64::INFINITY, 0usize);
        for (u, pair) in pairs.iter().enumerate() {
            let v = current_cost_2state_scalar(p, *pair, scenario.cost(u), scenario.lambda)?;
            if v < best.0 {
                best = (v, u);
            }
        }
        choice.push(best.1);
    }
    let report = compress_intervals(&grid, &choice);
    let absent = (0..scenario.num_controls()).filter(|u| !choice.contains(u)).collect();
    Ok(MyopicThresholds { report, absent })
}
