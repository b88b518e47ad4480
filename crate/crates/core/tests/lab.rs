use warplab::Error;
use warplab::lab::config::legendre;
use warplab::lab::record::{TRACE_COLUMNS, read_records, read_trace_csv};
use warplab::lab::run::{run_and_persist, run_flow, worst_rise};
use warplab::lab::suite::{Fault, ToleranceProfile, run_suite, tolerances};
use warplab::lab::sweep::{family_member, sweep};
use warplab::lab::{Scenario, SuiteOptions};
use warplab::par::Execution;

const T1_HYPERBOLIC: &str = r#"
name = "hyperbolic P2"
theorem = "T1"
model = "hyperbolic"
perturbation = [[2, 0.05]]
resolution = 24
"#;

#[test]
fn scenario_toml_round_trip() {
    let s = Scenario::from_toml(T1_HYPERBOLIC).unwrap();
    assert_eq!(s.n, 2);
    assert_eq!(s.perturbation, vec![(2, 0.05)]);
    let back = Scenario::from_toml(&s.to_toml().unwrap()).unwrap();
    assert_eq!(back, s);
    assert_eq!(back.hash(), s.hash());
    assert_eq!(s.hash().len(), 16);
}

#[test]
fn unknown_keys_and_bad_models_are_config_errors() {
    let typo = format!("{T1_HYPERBOLIC}\nresolutoin = 32\n");
    assert!(matches!(Scenario::from_toml(&typo), Err(Error::Config(_))));
    let mismatch = "theorem = \"T4\"\nmodel = \"hyperbolic\"\n";
    let s = Scenario::from_toml(mismatch).unwrap();
    assert!(matches!(s.resolve(Some(16)), Err(Error::Config(_))));
    let missing = Scenario::from_toml("theorem = \"T1\"\nmodel = \"alpha_beta\"\n").unwrap();
    assert!(matches!(missing.build_space(), Err(Error::Config(_))));
    let both = Scenario::from_toml("theorem = \"T4\"\nmodel = \"ads_schwarzschild\"\nmass = 2.0\nradius = 3.0\ns_multiple = 2.0\n").unwrap();
    assert!(both.resolve(Some(16)).is_err());
    // a dented start is refused
    let dented = Scenario::from_toml("theorem = \"T1\"\nmodel = \"hyperbolic\"\nperturbation = [[2, 0.6]]\n").unwrap();
    assert!(matches!(dented.resolve(Some(32)), Err(Error::Config(_))));
}

#[test]
fn hashes_separate_scenarios() {
    let a = Scenario::from_toml(T1_HYPERBOLIC).unwrap();
    let b = a.scaled(2.0);
    assert_ne!(a.hash(), b.hash());
    assert!((b.max_amplitude() - 0.1).abs() < 1e-15);
    let m = family_member(&a, 0.02);
    assert!((m.max_amplitude() - 0.02).abs() < 1e-15);
}

#[test]
fn legendre_values() {
    for x in [-1.0, -0.3, 0.0, 0.4, 1.0] {
        assert!((legendre(0, x) - 1.0).abs() < 1e-15);
        assert!((legendre(2, x) - 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-15);
        assert!((legendre(3, x) - 0.5 * (5.0 * x * x * x - 3.0 * x)).abs() < 1e-15);
    }
    assert!((legendre(9, 1.0) - 1.0).abs() < 1e-14);
}

#[test]
fn worst_rise_is_the_largest_relative_step() {
    // strictly decreasing: the "rise" is the mildest drop, negative
    assert!((worst_rise(&[3.0, 2.0, 1.0], 1.0) + 1.0 / 3.0).abs() < 1e-15);
    assert!((worst_rise(&[1.0, 1.5, 1.2, 1.4], 1.0) - 0.5).abs() < 1e-15);
}

#[test]
fn runs_are_reproducible_and_persisted() {
    let s = Scenario::from_toml(T1_HYPERBOLIC).unwrap();
    let (a, ta) = run_flow(&s, None).unwrap();
    let (b, tb) = run_flow(&s, None).unwrap();
    assert_eq!(a.numerics(), b.numerics());
    assert_eq!(ta.snapshots.len(), tb.snapshots.len());
    assert_eq!(a.resolution, 24);
    assert!(a.flow.as_ref().unwrap().all_pass());

    let dir = tempfile::tempdir().unwrap();
    let run = run_and_persist(&s, None, dir.path()).unwrap();
    assert!(run.record_path.starts_with(dir.path().join(s.hash())));
    let again = run_and_persist(&s, None, dir.path()).unwrap();
    let records = read_records(&run.record_path).unwrap();
    assert_eq!(records.len(), 2);
    assert_eq!(records[0].numerics(), again.record.numerics());
    assert_eq!(records[0].scenario_hash, s.hash());

    let text = std::fs::read_to_string(&run.trace_path).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header, TRACE_COLUMNS);
    let rows = read_trace_csv(&run.trace_path).unwrap();
    assert_eq!(rows.len(), run.trace.snapshots.len());
    for (row, snap) in rows.iter().zip(&run.trace.snapshots) {
        assert_eq!(row.t, snap.t);
        assert_eq!(row.area, snap.area);
        assert_eq!(row.deficit, snap.deficit);
    }
}

#[test]
fn sweep_contract() {
    let s = Scenario::from_toml(T1_HYPERBOLIC).unwrap();
    assert!(matches!(sweep(&s, &[0.01, 0.02, 0.03], Some(24), Execution::Sequential), Err(Error::Config(_))));
    assert!(sweep(&s, &[0.01, 0.02, f64::NAN, 0.04], Some(24), Execution::Sequential).is_err());

    let amps = [0.004, 0.01, 0.02, 0.04];
    let seq = sweep(&s, &amps, Some(24), Execution::Sequential).unwrap();
    let par = sweep(&s, &amps, Some(24), Execution::Parallel).unwrap();
    assert_eq!(serde_json::to_string(&seq).unwrap(), serde_json::to_string(&par).unwrap());
    assert_eq!(seq.rows.len(), 4);
    assert!(seq.rows.windows(2).all(|w| w[1].epsilon > w[0].epsilon && w[1].dist > w[0].dist));
    assert!(seq.bound_holds && seq.exponent_observed.is_some());
    assert!(seq.notes.is_empty(), "{:?}", seq.notes);

    // a narrow span and δ = 0 are reported, not rejected
    let narrow = sweep(&s, &[0.0, 0.02, 0.025, 0.03], Some(24), Execution::Sequential).unwrap();
    assert!(narrow.notes.iter().any(|n| n.contains("decade")));
    assert!(narrow.rows[0].fitted_c.is_none());
    let degenerate = sweep(&s, &[0.0; 4], Some(24), Execution::Sequential).unwrap();
    assert!(degenerate.exponent_observed.is_none() && degenerate.bound_holds);
    assert!(degenerate.notes.iter().any(|n| n.contains("regression skipped")));
}

#[test]
fn suite_passes_and_catches_a_planted_fault() {
    assert!(tolerances(8).is_err());
    let opts = SuiteOptions { profile: ToleranceProfile::Fast, resolution: Some(32), ..Default::default() };
    let report = run_suite(&opts).unwrap();
    assert!(report.passed, "{:?}", report.failures);
    assert!(report.checks.iter().any(|c| c.name == "schema_roundtrip"));
    assert!(report.checks.iter().any(|c| c.name.starts_with("static_trace")));

    let faulty = run_suite(&SuiteOptions { fault: Some(Fault::OmegaSign), ..opts }).unwrap();
    assert!(!faulty.passed);
    assert!(faulty.failures.iter().all(|f| f.starts_with("dual_path:")), "{:?}", faulty.failures);
    // flat space has ω′ = 0 in the conformal path, so its check cannot see the fault
    assert!(faulty.failures.len() >= 3);
}

#[test]
fn tolerance_profiles_parse() {
    assert_eq!("strict".parse::<ToleranceProfile>().unwrap(), ToleranceProfile::Strict);
    assert_eq!(ToleranceProfile::Fast.to_string(), "fast");
    assert!("loose".parse::<ToleranceProfile>().is_err());
}
