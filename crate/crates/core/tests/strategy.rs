mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sensetrack::dp::DpOptions;
use sensetrack::estimator::Belief;
use sensetrack::model::{ExplicitControl, KernelSet, MarkovChain, Scenario};
use sensetrack::sim::{default_scenario, Overrides, ScenarioKind};
use sensetrack::strategy::*;
use sensetrack::wwlb::WwlbAccumulator;
use sensetrack::Error;

fn scalar(sets: Vec<(KernelSet, f64)>, lambda: f64) -> Scenario {
    let chain = MarkovChain::from_columns(&[vec![0.9, 0.1], vec![0.2, 0.8]], &[0.5, 0.5]).unwrap();
    let controls = sets.into_iter().map(|(ks, cost)| ExplicitControl { cost, kernels: ks.kernels().to_vec() }).collect();
    Scenario::from_explicit(chain, controls, lambda, 4, None).unwrap()
}

fn cheapest(s: &Scenario) -> usize {
    (0..s.num_controls()).min_by(|&a, &b| s.cost(a).total_cmp(&s.cost(b))).unwrap()
}

#[test]
fn myopic_agrees_with_its_thresholds() {
    for lambda in [0.0, 0.3, 0.6, 0.9] {
        let s = default_scenario(ScenarioKind::TwoStateScalar, Overrides { lambda: Some(lambda), ..Default::default() }).unwrap();
        let th = myopic_thresholds(&s).unwrap();
        for i in 0..=400 {
            let p = i as f64 / 400.0;
            let u = myopic_choice(&s, &Belief::two_state(p)).unwrap();
            let owners: Vec<usize> =
                th.report.intervals.iter().filter(|t| t.p_low <= p && p <= t.p_high).map(|t| t.control).collect();
            assert!(owners.contains(&u), "λ={lambda} p={p}: {u} not in {owners:?}");
        }
    }
}

#[test]
fn dominated_control_is_absent_from_envelope() {
    let good = scalar_set(&[0.0, 2.0], &[1.0, 1.0]);
    let worse = scalar_set(&[0.0, 1.0], &[1.0, 1.0]);
    let other = scalar_set(&[0.0, 0.5], &[0.3, 1.0]);
    let s = scalar(vec![(good, 0.3), (worse, 0.5), (other, 0.1)], 0.4);
    let th = myopic_thresholds(&s).unwrap();
    assert!(th.absent.contains(&1));
    assert!(th.report.intervals.iter().all(|t| t.control != 1));
}

#[test]
fn thresholds_need_two_states() {
    let s = default_scenario(ScenarioKind::BodySensingLike, Overrides { budget: Some(2), ..Default::default() }).unwrap();
    assert!(matches!(myopic_thresholds(&s), Err(Error::NotTwoStateScalar)));
}

#[test]
fn fast_myopic_matches_generic() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for kind in [ScenarioKind::BodySensingLike, ScenarioKind::TwoSensor] {
        for lambda in [0.0, 0.2, 0.7] {
            let s = default_scenario(kind, Overrides { lambda: Some(lambda), budget: Some(6), ..Default::default() }).unwrap();
            let StrategyKind::Myopic(Some(eval)) = StrategyKind::myopic(&s) else { panic!("no fast path") };
            for _ in 0..30 {
                let b = Belief::from_slice(&random_belief(&mut rng, s.n())).unwrap();
                assert_eq!(myopic_choice_fast(&eval, &s, &b).unwrap(), myopic_choice(&s, &b).unwrap());
            }
        }
    }
}

#[test]
fn cost_only_picks_cheapest() {
    let s = default_scenario(ScenarioKind::TwoSensor, Overrides { lambda: Some(1.0), ..Default::default() }).unwrap();
    let c = cheapest(&s);
    let my = StrategyKind::myopic(&s);
    let ce = StrategyKind::ce_wwlb(&s, CeWwlbConfig::default()).unwrap();
    let StrategyKind::CeWwlb(planner) = &ce else { unreachable!() };
    let plan = ce_wwlb_plan(planner, &s).unwrap();
    assert!(plan.iter().all(|ch| ch.control == c));
    for p in [0.0, 0.3, 0.5, 0.9] {
        assert_eq!(decide(&my, &Belief::two_state(p), 1, &s, None).unwrap(), c);
    }
}

#[test]
fn ce_choice_at_zero_lambda_ignores_costs() {
    let s = default_scenario(ScenarioKind::TwoSensor, Overrides { lambda: Some(0.0), ..Default::default() }).unwrap();
    let plan_a = {
        let p = CeWwlbPlanner::new(&s, CeWwlbConfig::default()).unwrap();
        ce_wwlb_plan(&p, &s).unwrap()
    };
    let mut scaled = s.clone();
    for c in scaled.controls.iter_mut() {
        c.cost *= 0.5;
    }
    let plan_b = {
        let p = CeWwlbPlanner::new(&scaled, CeWwlbConfig::default()).unwrap();
        ce_wwlb_plan(&p, &scaled).unwrap()
    };
    let a: Vec<usize> = plan_a.iter().map(|c| c.control).collect();
    let b: Vec<usize> = plan_b.iter().map(|c| c.control).collect();
    assert_eq!(a, b);
    for ch in &plan_a {
        assert!(ch.score.v.is_finite() && ch.score.v >= 0.0);
    }
}

#[test]
fn equal_allocation_is_constant() {
    let s = default_scenario(ScenarioKind::BodySensingLike, Overrides::default()).unwrap();
    let ea = StrategyKind::equal_allocation(&s, 4).unwrap();
    let u = s.find_allocation(&[4, 4, 4]).unwrap();
    assert_eq!(ea.label(), "ea4");
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for k in 1..=s.horizon {
        let b = Belief::from_slice(&random_belief(&mut rng, 4)).unwrap();
        assert_eq!(decide(&ea, &b, k, &s, None).unwrap(), u);
    }
    assert!(StrategyKind::equal_allocation(&s, 5).is_err());
}

#[test]
fn decide_checks_its_inputs() {
    let s = default_scenario(ScenarioKind::TwoStateScalar, Overrides::default()).unwrap();
    let b = Belief::uniform(2);
    let my = StrategyKind::myopic(&s);
    assert!(matches!(decide(&my, &b, 0, &s, None), Err(Error::StageOutOfRange { .. })));
    assert!(matches!(decide(&my, &b, s.horizon + 1, &s, None), Err(Error::StageOutOfRange { .. })));
    let ce = StrategyKind::ce_wwlb(&s, CeWwlbConfig::default()).unwrap();
    assert!(ce.needs_accumulator());
    assert!(matches!(decide(&ce, &b, 1, &s, None), Err(Error::MissingAccumulator)));
    let StrategyKind::CeWwlb(planner) = &ce else { unreachable!() };
    let acc = WwlbAccumulator::new(&planner.problem);
    assert!(decide(&ce, &b, 1, &s, Some(&acc)).unwrap() < s.num_controls());
    assert!(StrategyKind::fixed(&s, s.num_controls()).is_err());
}

#[test]
fn strategy_names_parse() {
    let parse = |t: &str| StrategySpec::parse(t, 50, DpOptions::default(), CeWwlbConfig::default());
    assert!(matches!(parse("dp").unwrap(), StrategySpec::Dp { resolution: 50, .. }));
    assert!(matches!(parse("myopic").unwrap(), StrategySpec::Myopic));
    assert!(matches!(parse("ce-wwlb").unwrap(), StrategySpec::CeWwlb(_)));
    assert!(matches!(parse("ea:4").unwrap(), StrategySpec::EqualAllocation(4)));
    assert!(matches!(parse("fixed:2").unwrap(), StrategySpec::Fixed(2)));
    assert!(parse("greedy").is_err());
    let s = default_scenario(ScenarioKind::TwoStateScalar, Overrides::default()).unwrap();
    for (t, label) in [("dp", "dp"), ("myopic", "myopic"), ("ce-wwlb", "ce-wwlb"), ("fixed:1", "fixed1")] {
        assert_eq!(parse(t).unwrap().build(&s).unwrap().label(), label);
    }
}
