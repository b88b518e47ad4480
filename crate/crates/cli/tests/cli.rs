use std::path::Path;
use std::process::{Command, Output};

fn warplab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_warplab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn scenario(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const T1: &str = "theorem = \"T1\"\nmodel = \"hyperbolic\"\nperturbation = [[2, 0.05]]\n";

#[test]
fn check_passes_and_a_planted_fault_fails() {
    let dir = tempfile::tempdir().unwrap();
    let ok = warplab(dir.path(), &["check", "--tolerance-profile", "fast", "--resolution", "32"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert_eq!(json(&ok)["passed"], true);

    let bad = warplab(dir.path(), &["check", "--tolerance-profile", "fast", "--resolution", "32", "--inject-fault", "omega-sign"]);
    assert_eq!(bad.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&bad.stderr);
    assert!(stderr.contains("dual_path"), "{stderr}");
}

#[test]
fn config_problems_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let typo = scenario(dir.path(), "typo.toml", &format!("{T1}t_maxx = 3.0\n"));
    let out = warplab(dir.path(), &["geometry", "--scenario", &typo]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t_maxx"));

    let mismatch = scenario(dir.path(), "mismatch.toml", "theorem = \"T5\"\nmodel = \"alpha_beta\"\nalpha = 1.0\nbeta = 0.5\n");
    assert_eq!(warplab(dir.path(), &["deficit", "--scenario", &mismatch]).status.code(), Some(2));

    let missing = dir.path().join("nope.toml");
    assert_eq!(warplab(dir.path(), &["flow", "--scenario", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(warplab(dir.path(), &["check", "--resolution", "8"]).status.code(), Some(2));
    assert_eq!(warplab(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(warplab(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn geometry_and_deficit_reports() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario(dir.path(), "t1.toml", T1);
    let g = warplab(dir.path(), &["geometry", "--scenario", &sc, "--resolution", "32"]);
    assert_eq!(g.status.code(), Some(0));
    let g = json(&g);
    assert_eq!(g["resolution"], 32);
    assert!(g["convexity_margin"].as_f64().unwrap() > 0.0);
    assert!(g["dual_path_difference"].as_f64().unwrap() < 1e-8);

    let d = warplab(dir.path(), &["deficit", "--scenario", &sc, "--resolution", "32"]);
    assert_eq!(d.status.code(), Some(0));
    let d = json(&d);
    assert!(d["deficit"]["epsilon"].as_f64().unwrap() > 0.0);
    assert_eq!(d["scenario_hash"], g["scenario_hash"]);
}

#[test]
fn flow_writes_a_record_and_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario(dir.path(), "t1.toml", T1);
    let out_dir = dir.path().join("runs");
    let out = warplab(dir.path(), &["flow", "--scenario", &sc, "--resolution", "24", "--output-dir", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let hash = v["scenario_hash"].as_str().unwrap();
    let run = out_dir.join(hash);
    let jsonl = std::fs::read_to_string(run.join("runs.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 1);
    let record: serde_json::Value = serde_json::from_str(jsonl.lines().next().unwrap()).unwrap();
    assert_eq!(record["v"], 1);
    assert_eq!(record["resolution"], 24);
    let csv = std::fs::read_to_string(run.join("trace.csv")).unwrap();
    assert!(csv.starts_with("t,area,volume,int_H1,deficit,dissipation,sup_aring,convexity_margin,displacement_bound"));
    assert!(csv.lines().count() > 2);
}

#[test]
fn sweep_writes_its_table() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario(dir.path(), "t1.toml", T1);
    let out = warplab(dir.path(), &["sweep", "--scenario", &sc, "--amplitudes", "0.005,0.01,0.02,0.05", "--resolution", "24", "--sequential"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    let run = dir.path().join("warplab-out").join(v["scenario_hash"].as_str().unwrap());
    assert!(run.join("sweep_summary.json").exists());
    assert_eq!(std::fs::read_to_string(run.join("sweep.csv")).unwrap().lines().count(), 5);

    let few = warplab(dir.path(), &["sweep", "--scenario", &sc, "--amplitudes", "0.01,0.02"]);
    assert_eq!(few.status.code(), Some(2));
}

#[test]
fn shipped_scenarios_load_and_report() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let dir = tempfile::tempdir().unwrap();
    let mut seen = 0;
    for entry in std::fs::read_dir(&root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let out = warplab(dir.path(), &["deficit", "--scenario", path.to_str().unwrap(), "--resolution", "32"]);
            assert_eq!(out.status.code(), Some(0), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
            assert!(json(&out)["deficit"]["epsilon"].as_f64().unwrap() > 0.0);
            seen += 1;
        }
    }
    assert!(seen >= 4);
}
