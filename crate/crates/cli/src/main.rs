use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use warplab::Error;
use warplab::hypersurface::{convexity_margin, geometry_intrinsic, minkowski_residual, second_minkowski_residual};
use warplab::lab::run::{evaluate, run_and_persist};
use warplab::lab::suite::{Fault, SuiteOptions, ToleranceProfile, dual_path_difference, run_suite};
use warplab::lab::sweep::{persist, sweep};
use warplab::lab::Scenario;
use warplab::par::Execution;
use warplab::rigidity::to_euclidean;

const EXIT_CONFIG: u8 = 2;
const EXIT_SUITE: u8 = 3;
const EXIT_INTERNAL: u8 = 1;

#[derive(Parser)]
#[command(name = "warplab", version, about = "Hypersurface geometry, curvature flows and deficits in warped products")]
struct Cli {
    /// Grid resolution (θ nodes); overrides the scenario and profile defaults.
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// Directory for run records, traces and sweep tables.
    #[arg(long, global = true, default_value = "warplab-out")]
    output_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Profile::Strict)]
    tolerance_profile: Profile,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Strict,
    Fast,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    OmegaSign,
}

#[derive(Subcommand)]
enum Command {
    /// Run the invariant suite; exits 3 listing failures.
    Check {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Inject a deliberate fault (mutation testing of the suite).
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
    /// Geometry summary of a scenario's initial surface.
    Geometry {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Run the theorem's flow; writes a JSONL record and a CSV trace.
    Flow {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Assumptions, deficit and stability report of a scenario's initial surface.
    Deficit {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Amplitude sweep for the stability exponent.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated amplitudes (≥ 4).
        #[arg(long, value_delimiter = ',', required = true)]
        amplitudes: Vec<f64>,
        /// Run amplitudes one at a time.
        #[arg(long)]
        sequential: bool,
    },
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Hypothesis { .. } | Error::Domain(_) | Error::Horizon(_) | Error::Io(_) | Error::Serde(_) => EXIT_CONFIG,
        _ => EXIT_INTERNAL,
    }
}

fn print(v: &serde_json::Value) {
    // a closed pipe (e.g. `| head`) is not an error worth a panic
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(v).expect("json"));
}

fn execute(cli: Cli) -> Result<u8, Error> {
    let profile = match cli.tolerance_profile {
        Profile::Strict => ToleranceProfile::Strict,
        Profile::Fast => ToleranceProfile::Fast,
    };
    match cli.command {
        Command::Check { seed, inject_fault } => {
            let opts = SuiteOptions {
                profile,
                resolution: cli.resolution,
                seed,
                fault: inject_fault.map(|FaultArg::OmegaSign| Fault::OmegaSign),
                exec: Execution::default(),
            };
            let report = run_suite(&opts)?;
            print(&serde_json::to_value(&report)?);
            if !report.passed {
                eprintln!("check failed: {}", report.failures.join(", "));
                return Ok(EXIT_SUITE);
            }
            Ok(0)
        }
        Command::Geometry { scenario } => {
            let sc = Scenario::load(&scenario)?;
            let res = sc.resolve(cli.resolution)?;
            let s = &res.surface;
            let f = geometry_intrinsic(s)?;
            let conf = warplab::hypersurface::geometry_conformal(s)?;
            let img = to_euclidean(s)?;
            let hmin = f.mean.iter().copied().fold(f64::INFINITY, f64::min);
            let hmax = f.mean.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            print(&json!({
                "v": warplab::lab::SCHEMA_VERSION,
                "scenario_hash": sc.hash(),
                "resolution": res.resolution,
                "r_min": s.r_min(),
                "r_max": s.r_max(),
                "area": f.area(s.grid()),
                "volume": warplab::functionals::enclosed_volume(s)?,
                "int_H1": f.integrate(s.grid(), |i| f.h1[i]),
                "mean_curvature_range": [hmin, hmax],
                "sup_aring": f.sup_aring(),
                "convexity_margin": convexity_margin(&f),
                "minkowski_residual": minkowski_residual(s, &f),
                "second_minkowski_residual": second_minkowski_residual(s, &f),
                "dual_path_difference": dual_path_difference(&f, &conf),
                "sup_omega": img.sup_omega(),
            }));
            Ok(0)
        }
        Command::Flow { scenario } => {
            let sc = Scenario::load(&scenario)?;
            let run = run_and_persist(&sc, cli.resolution, &cli.output_dir)?;
            let summary = run.record.flow.as_ref().expect("flow summary");
            print(&json!({
                "scenario_hash": run.record.scenario_hash,
                "record": run.record_path,
                "trace": run.trace_path,
                "flow": summary,
                "initial_deficit": run.record.initial_deficit.epsilon,
                "stability": run.record.stability,
            }));
            if !summary.all_pass() {
                let failed: Vec<&str> = summary.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
                eprintln!("flow checks failed: {}", failed.join(", "));
                return Ok(EXIT_SUITE);
            }
            Ok(0)
        }
        Command::Deficit { scenario } => {
            let sc = Scenario::load(&scenario)?;
            let res = sc.resolve(cli.resolution)?;
            let (ev, rep, stab) = evaluate(&res, &sc)?;
            print(&json!({
                "v": warplab::lab::SCHEMA_VERSION,
                "scenario_hash": sc.hash(),
                "assumptions": ev.assumptions(),
                "deficit": rep,
                "stability": stab,
            }));
            Ok(0)
        }
        Command::Sweep { scenario, amplitudes, sequential } => {
            let sc = Scenario::load(&scenario)?;
            let exec = if sequential { Execution::Sequential } else { Execution::default() };
            let summary = sweep(&sc, &amplitudes, cli.resolution, exec)?;
            persist(&summary, &cli.output_dir)?;
            print(&serde_json::to_value(&summary)?);
            for note in &summary.notes {
                eprintln!("note: {note}");
            }
            Ok(if summary.bound_holds { 0 } else { EXIT_SUITE })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
