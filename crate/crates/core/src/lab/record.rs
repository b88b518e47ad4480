//! Persistence: one JSONL record per run, one CSV per flow trace.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ambient::AssumptionReport;
use crate::error::Result;
use crate::flows::{FlowKind, FlowTrace, Snapshot, Termination};
use crate::functionals::DeficitReport;
use crate::rigidity::StabilityReport;

/// Schema version of records and trace files.
pub const SCHEMA_VERSION: u32 = 1;

pub const TRACE_COLUMNS: [&str; 9] =
    ["t", "area", "volume", "int_H1", "deficit", "dissipation", "sup_aring", "convexity_margin", "displacement_bound"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub area: f64,
    pub volume: f64,
    #[serde(rename = "int_H1")]
    pub int_h1: f64,
    pub deficit: Option<f64>,
    pub dissipation: f64,
    pub sup_aring: f64,
    pub convexity_margin: f64,
    pub displacement_bound: f64,
}

impl From<&Snapshot> for TraceRow {
    fn from(s: &Snapshot) -> Self {
        Self {
            t: s.t,
            area: s.area,
            volume: s.volume,
            int_h1: s.int_h1,
            deficit: s.deficit,
            dissipation: s.dissipation,
            sup_aring: s.sup_aring,
            convexity_margin: s.convexity_margin,
            displacement_bound: s.displacement_bound,
        }
    }
}

/// Outcome of one inline check on a flow trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceCheck {
    pub name: String,
    pub pass: bool,
    /// Worst observed violation (≤ 0 when passing), in the units stated by `name`.
    pub worst: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSummary {
    pub kind: FlowKind,
    pub termination: Termination,
    pub steps: usize,
    pub rejected: usize,
    pub snapshots: usize,
    pub t_final: f64,
    pub epsilon_initial: Option<f64>,
    pub epsilon_final: Option<f64>,
    pub cumulative_dissipation: f64,
    pub checks: Vec<TraceCheck>,
}

impl FlowSummary {
    pub fn from_trace(trace: &FlowTrace, checks: Vec<TraceCheck>) -> Self {
        let (first, last) = (trace.first(), trace.last());
        Self {
            kind: trace.kind,
            termination: trace.termination.clone(),
            steps: trace.steps,
            rejected: trace.rejected,
            snapshots: trace.snapshots.len(),
            t_final: last.t,
            epsilon_initial: first.deficit,
            epsilon_final: last.deficit,
            cumulative_dissipation: last.cumulative_dissipation,
            checks,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub warplab: String,
    pub schema: u32,
}

impl Default for Versions {
    fn default() -> Self {
        Self { warplab: env!("CARGO_PKG_VERSION").to_string(), schema: SCHEMA_VERSION }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub v: u32,
    pub scenario_hash: String,
    pub scenario: super::Scenario,
    pub resolution: usize,
    pub assumptions: AssumptionReport,
    pub initial_deficit: DeficitReport,
    pub flow: Option<FlowSummary>,
    pub stability: StabilityReport,
    pub wall_time_s: f64,
    pub versions: Versions,
}

impl RunRecord {
    /// The record with wall time zeroed, for reproducibility comparisons.
    pub fn numerics(&self) -> Self {
        Self { wall_time_s: 0.0, ..self.clone() }
    }
}

/// `<root>/<hash>/`, created if missing.
pub fn run_dir(root: &Path, hash: &str) -> Result<PathBuf> {
    let dir = root.join(hash);
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

pub fn append_record(path: &Path, record: &RunRecord) -> Result<()> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut line = serde_json::to_string(record)?;
    line.push('\n');
    file.write_all(line.as_bytes())?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let text = fs::read_to_string(path)?;
    text.lines().filter(|l| !l.trim().is_empty()).map(|l| Ok(serde_json::from_str(l)?)).collect()
}

pub fn write_trace_csv(path: &Path, trace: &FlowTrace) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for s in &trace.snapshots {
        w.serialize(TraceRow::from(s))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| Ok(row?)).collect()
}
