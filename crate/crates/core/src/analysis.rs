//! Bound tables and the structural verification battery.

use crate::cost::{
    case4_crossing, classify_case, current_cost_2state_scalar, mse_term_h, mse_term_trace, passive_optimal, Case,
    ScalarPair, CASE_TOL, DUAL_FORM_TOL,
};
use crate::dp::{build_grid, check_concavity, check_concavity_values, extract_thresholds, DpSolution, Threshold};
use crate::error::Result;
use crate::model::Scenario;
use crate::output::{fmt_f, WwlbRow};
use crate::strategy::{commit, ce_wwlb_choice, CeWwlbPlanner};
use crate::wwlb::{v_score, wwlb_bound, WwlbAccumulator};

/// Scores of every control at every stage along the CE-WWLB plan.
pub fn wwlb_table(planner: &CeWwlbPlanner, scenario: &Scenario) -> Result<Vec<WwlbRow>> {
    let mut accum = WwlbAccumulator::new(&planner.problem);
    let mut rows = Vec::new();
    for stage in 1..=scenario.horizon {
        for u in 0..scenario.num_controls() {
            let Ok(score) = v_score(&planner.problem, &accum, u, &planner.pairs) else { continue };
            let (h_k, h_k1) = &planner.pairs[score.pair];
            rows.push(WwlbRow {
                stage,
                control: u,
                h_k: h_k.label(),
                h_k1: h_k1.label(),
                j: score.j,
                v: score.v,
                bound: wwlb_bound(score.j, 1.0)?,
            });
        }
        let choice = ce_wwlb_choice(planner, scenario, &accum)?;
        accum = commit(planner, &accum, &choice)?;
    }
    Ok(rows)
}

/// One line of the verification battery.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub check: String,
    pub subject: String,
    pub value: String,
    pub pass: bool,
}

impl Check {
    fn new(check: &str, subject: impl Into<String>, value: impl Into<String>, pass: bool) -> Self {
        Self { check: check.into(), subject: subject.into(), value: value.into(), pass }
    }

    pub fn into_tuple(self) -> (String, String, String, bool) {
        (self.check, self.subject, self.value, self.pass)
    }
}

/// Thresholds of every stage policy (two states only).
pub fn stage_thresholds(sol: &DpSolution) -> Result<Vec<(usize, Threshold)>> {
    let mut out = Vec::new();
    for pol in &sol.policies {
        for t in extract_thresholds(pol, &sol.grid)?.intervals {
            out.push((pol.stage, t));
        }
    }
    Ok(out)
}

/// Dual-form, closed-form, concavity, passive-sensing, ordering, crossing and threshold checks.
pub fn structure_battery(scenario: &Scenario, sol: &DpSolution) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let n = scenario.n();
    let probe = build_grid(n, if n == 2 { 1000 } else { 12 })?;

    let mut dual = 0.0_f64;
    for i in 0..probe.len() {
        let p = probe.point_vector(i);
        for ks in &scenario.kernels {
            dual = dual.max((mse_term_h(&p, ks)? - mse_term_trace(&p, ks)?).abs());
        }
    }
    checks.push(Check::new("dual_form", "all controls", fmt_f(dual), dual <= DUAL_FORM_TOL));

    let scalar = n == 2 && scenario.kernels.iter().all(|k| k.dim() == 1);
    if scalar {
        let pairs = scenario.kernels.iter().map(ScalarPair::from_kernels).collect::<Result<Vec<_>>>()?;
        let lambda = scenario.lambda;
        let mut closed = 0.0_f64;
        for (u, pair) in pairs.iter().enumerate() {
            let mut ell = Vec::with_capacity(probe.len());
            for i in 0..probe.len() {
                let p = probe.point_vector(i);
                let generic = (1.0 - lambda) * mse_term_trace(&p, &scenario.kernels[u])? + lambda * scenario.cost(u);
                let c = current_cost_2state_scalar(p[0], *pair, scenario.cost(u), lambda)?;
                closed = closed.max((generic - c).abs());
                ell.push(c);
            }
            let rep = check_concavity_values(&ell, &probe);
            checks.push(Check::new(
                "current_cost_concavity",
                format!("control {u}"),
                fmt_f(rep.max_second_difference),
                rep.pass,
            ));
        }
        checks.push(Check::new("closed_form", "all controls", fmt_f(closed), closed <= DUAL_FORM_TOL));

        let labels = scenario.kernels.iter().map(classify_case).collect::<Result<Vec<_>>>()?;
        let passive = passive_optimal(scenario, lambda)?;
        let (value, pass) = match passive {
            Some(u) => {
                let constant = sol.policies.iter().all(|p| p.choice.iter().all(|&c| c == u));
                (format!("control {u}"), constant)
            }
            None => ("none".to_string(), true),
        };
        checks.push(Check::new("passive_optimal", format!("lambda {}", fmt_f(lambda)), value, pass));

        let grid = crate::cost::cert_grid();
        for a in 0..pairs.len() {
            for b in 0..pairs.len() {
                if a == b || labels[a].variant != Case::III || labels[b].variant != Case::III {
                    continue;
                }
                if (pairs[a].v1 - pairs[b].v1).abs() > CASE_TOL || labels[a].a12 <= labels[b].a12 {
                    continue;
                }
                let (ca, cb) = (scenario.cost(a), scenario.cost(b));
                let equal = (ca - cb).abs() <= CASE_TOL;
                if !equal && ca > cb {
                    continue;
                }
                let mut ok = true;
                for &p in &grid {
                    let la = current_cost_2state_scalar(p, pairs[a], ca, lambda)?;
                    let lb = current_cost_2state_scalar(p, pairs[b], cb, lambda)?;
                    let interior = p > 0.0 && p < 1.0;
                    ok &= if equal { la <= lb + CASE_TOL } else { !interior || la < lb };
                }
                let name = if equal { "ordering_equal_cost" } else { "ordering_cheaper" };
                checks.push(Check::new(name, format!("controls {a} over {b}"), "a12 larger", ok));
            }
        }

        for a in 0..pairs.len() {
            for b in 0..pairs.len() {
                if a == b {
                    continue;
                }
                let Ok(p_star) =
                    case4_crossing(&scenario.kernels[a], scenario.cost(a), &scenario.kernels[b], scenario.cost(b))
                else {
                    continue;
                };
                let mut ok = true;
                for &p in &grid {
                    let d = current_cost_2state_scalar(p, pairs[a], scenario.cost(a), lambda)?
                        - current_cost_2state_scalar(p, pairs[b], scenario.cost(b), lambda)?;
                    if p <= p_star {
                        ok &= d <= CASE_TOL;
                    }
                    if p >= p_star {
                        ok &= d >= -CASE_TOL;
                    }
                }
                checks.push(Check::new("case4_crossing", format!("controls {a},{b}"), fmt_f(p_star), ok));
            }
        }

        for pol in &sol.policies {
            let rep = extract_thresholds(pol, &sol.grid)?;
            let value = if rep.non_contiguous.is_empty() {
                format!("{} intervals", rep.intervals.len())
            } else {
                format!("{} intervals; repeated controls {:?}", rep.intervals.len(), rep.non_contiguous)
            };
            checks.push(Check::new("thresholds", format!("stage {}", pol.stage), value, true));
        }
    }

    for table in &sol.values {
        let rep = check_concavity(table);
        let subject = if rep.advisory {
            format!("stage {} (advisory)", table.stage)
        } else {
            format!("stage {}", table.stage)
        };
        checks.push(Check::new("dp_concavity", subject, fmt_f(rep.max_second_difference), rep.pass));
    }
    Ok(checks)
}
