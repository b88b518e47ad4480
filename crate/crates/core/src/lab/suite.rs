//! The invariant suite behind `warplab check`.
//!
//! Tolerance table (absolute for residuals and deficits, normwise relative for the dual path):
//!
//! | resolution | dual_path | minkowski | slice_deficit | static_identity | phi_prime |
//! |------------|-----------|-----------|---------------|-----------------|-----------|
//! | ≥ 32       | 1e-8      | 1e-8      | 1e-8          | 1e-8            | 1e-8      |
//! | 16 – 31    | 1e-6      | 1e-6      | 1e-8          | 1e-8            | 1e-8      |
//!
//! Slice deficits, the static identities and the φ′ identity do not depend on the grid
//! (slices are resolved exactly; the others are one-dimensional), so only the
//! corpus-based checks relax at low resolution. Below 16 the suite refuses to run.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ambient::{StaticKind, check_static_identity};
use crate::error::{Error, Result};
use crate::functionals::{DeficitEvaluator, SliceTable, Theorem};
use crate::hypersurface::{
    ConformalOptions, GeometryFields, GraphSurface, geometry_conformal_with, geometry_intrinsic, minkowski_residual,
    second_minkowski_residual,
};
use crate::par::{self, Execution};
use crate::spheregrid::SphereGrid;

use super::catalog::{CatalogEntry, catalog, corpus};
use super::config::{Scenario, legendre};
use super::record::{TRACE_COLUMNS, TraceRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToleranceProfile {
    Strict,
    Fast,
}

impl ToleranceProfile {
    pub fn default_resolution(self) -> usize {
        match self {
            ToleranceProfile::Strict => 64,
            ToleranceProfile::Fast => 32,
        }
    }

    /// Corpus members per catalog space.
    pub fn corpus_size(self) -> usize {
        match self {
            ToleranceProfile::Strict => 10,
            ToleranceProfile::Fast => 3,
        }
    }
}

impl FromStr for ToleranceProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Self::Strict),
            "fast" => Ok(Self::Fast),
            other => Err(Error::Config(format!("unknown tolerance profile {other:?} (strict | fast)"))),
        }
    }
}

impl fmt::Display for ToleranceProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ToleranceProfile::Strict => "strict",
            ToleranceProfile::Fast => "fast",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub dual_path: f64,
    pub minkowski: f64,
    pub slice_deficit: f64,
    pub static_identity: f64,
    pub phi_prime: f64,
}

pub fn tolerances(resolution: usize) -> Result<Tolerances> {
    if resolution < 16 {
        return Err(Error::Config(format!("the check suite needs resolution ≥ 16 (got {resolution})")));
    }
    let corpus = if resolution >= 32 { 1e-8 } else { 1e-6 };
    Ok(Tolerances { dual_path: corpus, minkowski: corpus, slice_deficit: 1e-8, static_identity: 1e-8, phi_prime: 1e-8 })
}

/// Deliberate faults for mutation testing of the suite itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Flip the sign of the ω_ν̃ term in the conformal path.
    OmegaSign,
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub profile: ToleranceProfile,
    pub resolution: Option<usize>,
    pub seed: u64,
    pub fault: Option<Fault>,
    pub exec: Execution,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { profile: ToleranceProfile::Strict, resolution: None, seed: 7, fault: None, exec: Execution::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckResult {
    fn measure(name: String, value: Result<f64>, tol: f64) -> Self {
        match value {
            Ok(v) => Self { name, pass: v.is_finite() && v <= tol, value: v, tol, detail: None },
            Err(e) => Self { name, pass: false, value: f64::NAN, tol, detail: Some(e.to_string()) },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub v: u32,
    pub profile: ToleranceProfile,
    pub resolution: usize,
    pub tolerances: Tolerances,
    pub passed: bool,
    pub failures: Vec<String>,
    pub checks: Vec<CheckResult>,
}

/// max|a − b| / max|a| over nodes.
pub fn normwise_relative(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let den = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if den > 0.0 { num / den } else { num }
}

/// Larger of the normwise relative differences in H and |Å|² between two field sets.
pub fn dual_path_difference(a: &GeometryFields, b: &GeometryFields) -> f64 {
    let ha = normwise_relative(&a.mean, &b.mean);
    // |Å|² is measured relative to |A|², so umbilic surfaces do not divide by zero
    let num = a.aring2.iter().zip(&b.aring2).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let den = a.a2.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    ha.max(if den > 0.0 { num / den } else { num })
}

fn dual_path(surface: &GraphSurface, fault: Option<Fault>) -> Result<f64> {
    let opts = ConformalOptions { omega_sign: if fault == Some(Fault::OmegaSign) { -1.0 } else { 1.0 } };
    let a = geometry_intrinsic(surface)?;
    let b = geometry_conformal_with(surface, opts)?;
    Ok(dual_path_difference(&a, &b))
}

fn max_over<F: Fn(&GraphSurface) -> Result<f64>>(surfaces: &[GraphSurface], f: F) -> Result<f64> {
    surfaces.iter().try_fold(0.0f64, |m, s| Ok(m.max(f(s)?)))
}

fn space_checks(entry: &CatalogEntry, grid: &Arc<SphereGrid>, opts: &SuiteOptions, tol: &Tolerances) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let surfaces = corpus(grid, entry, opts.seed, opts.profile.corpus_size());
    let name = entry.name;
    match surfaces {
        Err(e) => {
            out.push(CheckResult { name: format!("corpus:{name}"), pass: false, value: f64::NAN, tol: 0.0, detail: Some(e.to_string()) });
        }
        Ok(surfaces) => {
            out.push(CheckResult::measure(format!("dual_path:{name}"), max_over(&surfaces, |s| dual_path(s, opts.fault)), tol.dual_path));
            out.push(CheckResult::measure(
                format!("minkowski_first:{name}"),
                max_over(&surfaces, |s| Ok(minkowski_residual(s, &geometry_intrinsic(s)?).abs())),
                tol.minkowski,
            ));
            out.push(CheckResult::measure(
                format!("minkowski_second:{name}"),
                max_over(&surfaces, |s| Ok(second_minkowski_residual(s, &geometry_intrinsic(s)?).abs())),
                tol.minkowski,
            ));
        }
    }
    for th in Theorem::ALL.into_iter().filter(|t| t.supports(entry.space.model())) {
        let value = (|| {
            let ev = DeficitEvaluator::new(entry.space.clone(), th)?;
            let slice = GraphSurface::slice(grid.clone(), entry.space.clone(), entry.base_radius)?;
            let fields = geometry_intrinsic(&slice)?;
            Ok(ev.evaluate(&slice, &fields)?.epsilon.abs())
        })();
        out.push(CheckResult::measure(format!("slice_deficit:{th}:{name}"), value, tol.slice_deficit));
    }
    if let Some(sm) = entry.space.static_model() {
        let label = match sm.kind {
            StaticKind::AdsSchwarzschild => "static_laplacian",
            StaticKind::RnAds => "static_trace",
        };
        out.push(CheckResult::measure(format!("{label}:{name}"), Ok(check_static_identity(sm, 200)), tol.static_identity));
    }
    if name == "hyperbolic" {
        let value = SliceTable::build(entry.space.clone(), None, 64)
            .and_then(|t| t.phi_prime_residuals(0.0))
            .map(|r| r.into_iter().fold(0.0, f64::max));
        out.push(CheckResult::measure(format!("phi_prime:{name}"), value, tol.phi_prime));
    }
    out
}

fn schema_roundtrip() -> Result<f64> {
    let scenario = Scenario::from_toml("theorem = \"T1\"\nmodel = \"hyperbolic\"\nperturbation = [[2, 0.05]]\n")?;
    let back = Scenario::from_toml(&scenario.to_toml()?)?;
    if back != scenario {
        return Err(Error::Serde("scenario TOML round trip changed the scenario".into()));
    }
    let row = TraceRow {
        t: 0.125,
        area: 12.5,
        volume: 4.0,
        int_h1: 1.0 / 3.0,
        deficit: None,
        dissipation: 1e-300,
        sup_aring: legendre(3, 0.3),
        convexity_margin: 0.5,
        displacement_bound: 0.0,
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.serialize(&row)?;
    let bytes = w.into_inner().map_err(|e| Error::Serde(e.to_string()))?;
    let mut r = csv::Reader::from_reader(bytes.as_slice());
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if header != TRACE_COLUMNS {
        return Err(Error::Serde(format!("trace header {header:?} differs from the schema")));
    }
    let parsed: TraceRow = r.deserialize().next().ok_or_else(|| Error::Serde("no row read back".into()))??;
    if parsed != row {
        return Err(Error::Serde("trace row changed in a CSV round trip".into()));
    }
    Ok(0.0)
}

pub fn run_suite(opts: &SuiteOptions) -> Result<SuiteReport> {
    let resolution = opts.resolution.unwrap_or(opts.profile.default_resolution());
    let tol = tolerances(resolution)?;
    let grid = Arc::new(SphereGrid::axisym(2, resolution)?);
    let entries = catalog(2)?;
    let per_space = par::map_jobs(opts.exec, &entries, |e| space_checks(e, &grid, opts, &tol));
    let mut checks: Vec<CheckResult> = per_space.into_iter().flatten().collect();
    checks.push(CheckResult::measure("schema_roundtrip".into(), schema_roundtrip(), 0.0));
    let failures: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
    Ok(SuiteReport {
        v: super::record::SCHEMA_VERSION,
        profile: opts.profile,
        resolution,
        tolerances: tol,
        passed: failures.is_empty(),
        failures,
        checks,
    })
}
