//! CSV writers. Floats carry 17 significant digits.

use std::io::Write;

use crate::dp::{DpSolution, Threshold};
use crate::error::{Error, Result};
use crate::model::Scenario;
use crate::sim::MetricsReport;

/// `x` with 17 significant digits.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

pub const SWEEP_HEADER: [&str; 11] =
    ["lambda", "strategy", "amse", "amse_ci", "adp", "adp_ci", "aec", "aec_ci", "runs", "horizon", "seed"];

pub fn write_metrics<W: Write>(w: W, rows: &[MetricsReport]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(SWEEP_HEADER).map_err(csv_err)?;
    for r in rows {
        out.write_record([
            fmt_f(r.lambda),
            r.strategy.clone(),
            fmt_f(r.amse),
            fmt_f(r.amse_ci),
            fmt_f(r.adp),
            fmt_f(r.adp_ci),
            fmt_f(r.aec),
            fmt_f(r.aec_ci),
            r.runs.to_string(),
            r.horizon.to_string(),
            r.seed.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// `stage,p_index,p0..p{n-1},control_id,value` for every stage and grid point.
pub fn write_policy<W: Write>(w: W, sol: &DpSolution) -> Result<()> {
    let mut out = writer(w);
    let n = sol.grid.n();
    let mut header = vec!["stage".to_string(), "p_index".to_string()];
    header.extend((0..n).map(|i| format!("p{i}")));
    header.push("control_id".into());
    header.push("value".into());
    out.write_record(&header).map_err(csv_err)?;
    for (s, (pol, val)) in sol.policies.iter().zip(&sol.values).enumerate() {
        for i in 0..sol.grid.len() {
            let mut row = vec![(s + 1).to_string(), i.to_string()];
            row.extend(sol.grid.point(i).iter().map(|&x| fmt_f(x)));
            row.push(pol.choice[i].to_string());
            row.push(fmt_f(val.values[i]));
            out.write_record(&row).map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_thresholds<W: Write>(w: W, rows: &[(usize, Threshold)]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["stage", "p_low", "p_high", "control_id"]).map_err(csv_err)?;
    for (stage, t) in rows {
        out.write_record([stage.to_string(), fmt_f(t.p_low), fmt_f(t.p_high), t.control.to_string()])
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// One scored (stage, control) of the sequential bound.
#[derive(Debug, Clone, PartialEq)]
pub struct WwlbRow {
    pub stage: usize,
    pub control: usize,
    pub h_k: String,
    pub h_k1: String,
    pub j: f64,
    pub v: f64,
    pub bound: f64,
}

pub fn write_wwlb<W: Write>(w: W, rows: &[WwlbRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["stage", "control_id", "h_k", "h_k1", "J", "v", "bound"]).map_err(csv_err)?;
    for r in rows {
        out.write_record([
            r.stage.to_string(),
            r.control.to_string(),
            r.h_k.clone(),
            r.h_k1.clone(),
            fmt_f(r.j),
            fmt_f(r.v),
            fmt_f(r.bound),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// `control_id,cost,energy,<sensor>...` (allocation columns only for sensor scenarios).
pub fn write_controls<W: Write>(w: W, scenario: &Scenario) -> Result<()> {
    let mut out = writer(w);
    let mut header = vec!["control_id".to_string(), "cost".into(), "energy".into()];
    if let crate::model::ObservationSource::Sensors { sensors, .. } = &scenario.source {
        header.extend(sensors.iter().map(|s| s.name.clone()));
    }
    out.write_record(&header).map_err(csv_err)?;
    for (u, c) in scenario.controls.iter().enumerate() {
        let mut row = vec![u.to_string(), fmt_f(c.cost), fmt_f(scenario.energy(u))];
        if let Some(a) = &c.allocation {
            row.extend(a.iter().map(|v| v.to_string()));
        }
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Rows of `check,subject,value,pass`.
pub fn write_checks<W: Write>(w: W, rows: &[(String, String, String, bool)]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["check", "subject", "value", "pass"]).map_err(csv_err)?;
    for (c, s, v, p) in rows {
        out.write_record([c.as_str(), s.as_str(), v.as_str(), if *p { "true" } else { "false" }]).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}
