//! Single-scenario orchestration: deficit, stability report and the theorem's flow.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::error::Result;
use crate::flows::{self, FlowKind, FlowTrace, Monitor};
use crate::functionals::{DEFICIT_TOL, DeficitEvaluator, DeficitReport};
use crate::hypersurface::{GeometryFields, GraphSurface, geometry_intrinsic};
use crate::rigidity::{self, StabilityInputs, StabilityReport};

use super::config::{Resolved, Scenario};
use super::record::{self, FlowSummary, RunRecord, TraceCheck, Versions, SCHEMA_VERSION};

/// Relative slack for per-snapshot monotonicity.
pub const MONOTONE_TOL: f64 = 1e-8;
/// Absolute slack in dissipation ≤ ε(0).
pub const ACCOUNTING_TOL: f64 = 1e-6;
/// Absolute slack for the displacement bound (interpolation roundoff at t = 0).
pub const DISPLACEMENT_ROUNDOFF: f64 = 1e-12;

pub fn stability_for(surface: &GraphSurface, fields: &GeometryFields, epsilon: f64) -> Result<StabilityReport> {
    let a = rigidity::analyze(surface, fields, false)?;
    Ok(rigidity::stability_check(StabilityInputs {
        n: surface.space().n(),
        epsilon,
        aring_lp: a.aring_lp,
        dist_slice: a.slice.1,
        f_norm: a.norms.mean_subtracted,
        tol: DEFICIT_TOL,
        bound: None,
    }))
}

/// Deficit and stability report of the scenario's initial surface.
pub fn evaluate(res: &Resolved, scenario: &Scenario) -> Result<(DeficitEvaluator, DeficitReport, StabilityReport)> {
    let ev = DeficitEvaluator::new(res.space.clone(), scenario.theorem)?;
    let fields = geometry_intrinsic(&res.surface)?;
    let rep = ev.evaluate(&res.surface, &fields)?;
    let stab = stability_for(&res.surface, &fields, rep.epsilon)?;
    Ok((ev, rep, stab))
}

/// Largest step-to-step increase relative to max(|previous|, floor).
pub fn worst_rise(values: &[f64], floor: f64) -> f64 {
    values.windows(2).map(|w| (w[1] - w[0]) / w[0].abs().max(floor)).fold(f64::NEG_INFINITY, f64::max)
}

fn check(name: &str, worst: f64, tol: f64) -> TraceCheck {
    TraceCheck { name: name.into(), pass: !(worst > tol), worst: if worst.is_finite() { worst } else { 0.0 } }
}

/// Monotone monitors and deficit accounting appropriate for the flow.
pub fn trace_checks(trace: &FlowTrace) -> Vec<TraceCheck> {
    let s = &trace.snapshots;
    let mut out = Vec::new();
    if trace.kind == FlowKind::Constrained {
        let area: Vec<f64> = s.iter().map(|x| -x.area).collect();
        out.push(check("area_nondecreasing", worst_rise(&area, f64::MIN_POSITIVE), MONOTONE_TOL));
        let b1: Vec<f64> = s.iter().map(|x| x.b1).collect();
        out.push(check("b1_nonincreasing", worst_rise(&b1, f64::MIN_POSITIVE), MONOTONE_TOL));
    }
    let q: Vec<f64> = s.iter().filter_map(|x| x.brendle.map(|b| b.q_current)).collect();
    if q.len() == s.len() && !q.is_empty() {
        // Q vanishes on coordinate spheres, so its changes are measured against max(|Q|, 1)
        out.push(check("brendle_q_nonincreasing", worst_rise(&q, 1.0), MONOTONE_TOL));
    }
    if let Some(eps0) = trace.first().deficit {
        let worst = s.iter().map(|x| x.cumulative_dissipation - eps0).fold(f64::NEG_INFINITY, f64::max);
        out.push(check("deficit_accounting", worst, ACCOUNTING_TOL));
    }
    if s.iter().all(|x| x.hausdorff.is_some()) {
        let worst = s.iter().map(|x| x.hausdorff.unwrap_or(0.0) - x.displacement_bound).fold(f64::NEG_INFINITY, f64::max);
        out.push(check("displacement_bound", worst, DISPLACEMENT_ROUNDOFF));
    }
    out
}

pub struct FlowRun {
    pub record: RunRecord,
    pub trace: FlowTrace,
    pub record_path: PathBuf,
    pub trace_path: PathBuf,
}

/// Runs the scenario's flow with all monitors. Guard trips end the run normally and are
/// recorded as the termination reason.
pub fn run_flow(scenario: &Scenario, resolution: Option<usize>) -> Result<(RunRecord, FlowTrace)> {
    let start = Instant::now();
    let res = scenario.resolve(resolution)?;
    let (ev, rep, stab) = evaluate(&res, scenario)?;
    let assumptions = ev.assumptions().clone();
    let monitor = Monitor { deficit: Some(ev), brendle: scenario.theorem.is_static(), hausdorff: true };
    let trace = flows::run(&res.surface, &res.controls, &monitor)?;
    let summary = FlowSummary::from_trace(&trace, trace_checks(&trace));
    let record = RunRecord {
        v: SCHEMA_VERSION,
        scenario_hash: scenario.hash(),
        scenario: scenario.clone(),
        resolution: res.resolution,
        assumptions,
        initial_deficit: rep,
        flow: Some(summary),
        stability: stab,
        wall_time_s: start.elapsed().as_secs_f64(),
        versions: Versions::default(),
    };
    Ok((record, trace))
}

/// `run_flow` plus persistence under `<out>/<hash>/`.
pub fn run_and_persist(scenario: &Scenario, resolution: Option<usize>, out: &Path) -> Result<FlowRun> {
    let (record, trace) = run_flow(scenario, resolution)?;
    let dir = record::run_dir(out, &record.scenario_hash)?;
    let record_path = dir.join("runs.jsonl");
    let trace_path = dir.join("trace.csv");
    record::append_record(&record_path, &record)?;
    record::write_trace_csv(&trace_path, &trace)?;
    Ok(FlowRun { record, trace, record_path, trace_path })
}
