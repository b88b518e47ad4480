//! Experiment harness: scenarios, the model catalog, persistence, the check suite and
//! amplitude sweeps. The `warplab` binary is a thin wrapper over this module.

pub mod catalog;
pub mod config;
pub mod record;
pub mod run;
pub mod suite;
pub mod sweep;

pub use config::Scenario;
pub use record::{RunRecord, SCHEMA_VERSION};
pub use suite::{SuiteOptions, SuiteReport, ToleranceProfile};
