//! Amplitude sweeps for the stability exponent.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::DEFICIT_TOL;
use crate::hypersurface::geometry_intrinsic;
use crate::par::{self, Execution};
use crate::rigidity::{self, stability_exponent};

use super::config::Scenario;
use super::run::evaluate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub delta: f64,
    pub epsilon: f64,
    pub dist: f64,
    pub aring_lp: f64,
    pub f_norm: f64,
    pub fitted_c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub v: u32,
    pub scenario_hash: String,
    pub resolution: usize,
    /// Guaranteed exponent 1/(2(n+1)).
    pub exponent_guaranteed: f64,
    /// Least-squares slope of log dist against log ε.
    pub exponent_observed: Option<f64>,
    pub fitted_c_max: Option<f64>,
    /// dist ≤ fitted_c_max·ε^{1/(2(n+1))} on every row.
    pub bound_holds: bool,
    /// Largest f_norm/‖Å‖ over the rows.
    pub norm_ratio_max: Option<f64>,
    pub notes: Vec<String>,
    pub rows: Vec<SweepRow>,
}

/// The family Σ_δ: the scenario's perturbation rescaled so that its largest amplitude is δ
/// (a pure P₂ mode when the scenario has none).
pub fn family_member(scenario: &Scenario, delta: f64) -> Scenario {
    if scenario.max_amplitude() > 0.0 {
        scenario.scaled(delta / scenario.max_amplitude())
    } else {
        let mut s = scenario.clone();
        s.perturbation = vec![(2, delta)];
        s
    }
}

pub fn sweep(scenario: &Scenario, amplitudes: &[f64], resolution: Option<usize>, exec: Execution) -> Result<SweepSummary> {
    if amplitudes.len() < 4 {
        return Err(Error::Config(format!("a sweep needs at least 4 amplitudes (got {})", amplitudes.len())));
    }
    if amplitudes.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(Error::Config("amplitudes must be finite and nonnegative".into()));
    }
    let space = scenario.build_space()?;
    let n = space.n();
    let rows: Vec<Result<SweepRow>> = par::map_jobs(exec, amplitudes, |&delta| {
        let member = family_member(scenario, delta);
        let res = member.resolve(resolution)?;
        let (_, rep, _) = evaluate(&res, &member)?;
        let fields = geometry_intrinsic(&res.surface)?;
        let a = rigidity::analyze(&res.surface, &fields, false)?;
        let fitted_c = (rep.epsilon > DEFICIT_TOL).then(|| a.slice.1 / rep.epsilon.powf(stability_exponent(n)));
        Ok(SweepRow { delta, epsilon: rep.epsilon, dist: a.slice.1, aring_lp: a.aring_lp, f_norm: a.norms.mean_subtracted, fitted_c })
    });
    let mut rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.delta.total_cmp(&b.delta));

    let mut notes = Vec::new();
    let positive: Vec<f64> = amplitudes.iter().copied().filter(|a| *a > 0.0).collect();
    let (lo, hi) = positive.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &a| (l.min(a), h.max(a)));
    if positive.len() >= 2 && hi / lo < 10.0 {
        notes.push(format!("amplitudes span {:.2}× (< one decade); the slope is less well determined", hi / lo));
    }
    if rows.windows(2).any(|w| w[1].epsilon < w[0].epsilon - DEFICIT_TOL) {
        notes.push("warning: ε(δ) is not nondecreasing; the resolution may be insufficient".into());
    }
    let fit_rows: Vec<&SweepRow> = rows.iter().filter(|r| r.fitted_c.is_some() && r.dist > 0.0).collect();
    let exponent_observed = if fit_rows.len() >= 2 {
        let eps: Vec<f64> = fit_rows.iter().map(|r| r.epsilon).collect();
        let dist: Vec<f64> = fit_rows.iter().map(|r| r.dist).collect();
        Some(rigidity::loglog_slope(&eps, &dist)?.0)
    } else {
        notes.push("regression skipped: fewer than two rows with positive deficit".into());
        None
    };
    let fitted_c_max = rows.iter().filter_map(|r| r.fitted_c).reduce(f64::max);
    let e = stability_exponent(n);
    let bound_holds = match fitted_c_max {
        Some(c) if c.is_finite() => rows.iter().all(|r| r.fitted_c.is_none() || r.dist <= c * r.epsilon.powf(e) * (1.0 + 1e-12)),
        Some(_) => false,
        None => rows.iter().all(|r| r.dist <= DEFICIT_TOL.sqrt()),
    };
    let norm_ratio_max = rows.iter().filter(|r| r.aring_lp > DEFICIT_TOL).map(|r| r.f_norm / r.aring_lp).reduce(f64::max);
    Ok(SweepSummary {
        v: super::record::SCHEMA_VERSION,
        scenario_hash: scenario.hash(),
        resolution: resolution.or(scenario.resolution).unwrap_or(super::config::DEFAULT_RESOLUTION),
        exponent_guaranteed: e,
        exponent_observed,
        fitted_c_max,
        bound_holds,
        norm_ratio_max,
        notes,
        rows,
    })
}

/// Writes `sweep.csv` (δ, ε, dist, ‖Å‖, f_norm, fitted_C) and `sweep_summary.json`.
pub fn persist(summary: &SweepSummary, out: &Path) -> Result<()> {
    let dir = super::record::run_dir(out, &summary.scenario_hash)?;
    let mut w = csv::Writer::from_path(dir.join("sweep.csv"))?;
    for r in &summary.rows {
        w.serialize(r)?;
    }
    w.flush()?;
    std::fs::write(dir.join("sweep_summary.json"), serde_json::to_string_pretty(summary)?)?;
    Ok(())
}
