use serde_json::Value;
use spin7_cli::scenario::Scenario;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_spin7");

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(BIN).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn run_config(config: &Path, sub: &str, out: &Path) -> Output {
    run(&["--config", config.to_str().unwrap(), sub], out)
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn verify_on_the_identity_frame_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(&scenarios().join("identity.json"), "verify", dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let rep = report(dir.path());
    assert_eq!(rep["schema"], "spin7-report/1");
    assert_eq!(rep["pass"], true);
    assert!(rep["rows"].as_array().unwrap().len() > 10);
}

#[test]
fn corrupted_form_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(&scenarios().join("corrupted.json"), "verify", dir.path());
    assert_eq!(o.status.code(), Some(1));
    let rep = report(dir.path());
    let failing: Vec<&str> = rep["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["pass"] == false)
        .map(|r| r["check"].as_str().unwrap())
        .collect();
    assert!(!failing.is_empty());
    assert!(failing.iter().all(|c| c.starts_with("algebra/")), "{failing:?}");
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(
        dir.path(),
        "unknown.json",
        r#"{"name": "x", "lattice": {"active_dims": 1, "points": 8}, "frame": {"kind": "constant"},
            "params": {"kappa": 0.0}, "colour": "blue"}"#,
    );
    assert_eq!(run_config(&unknown, "verify", dir.path()).status.code(), Some(2));

    let bad_lattice = write(
        dir.path(),
        "lattice.json",
        r#"{"name": "x", "lattice": {"active_dims": 1, "points": 3}, "frame": {"kind": "constant"},
            "params": {"kappa": 0.0}}"#,
    );
    assert_eq!(run_config(&bad_lattice, "verify", dir.path()).status.code(), Some(2));

    let singular = write(
        dir.path(),
        "kappa.json",
        r#"{"name": "x", "lattice": {"active_dims": 1, "points": 8}, "frame": {"kind": "constant"},
            "params": {"kappa": 1.0}}"#,
    );
    assert_eq!(run_config(&singular, "residual", dir.path()).status.code(), Some(2));

    assert_eq!(run_config(&dir.path().join("missing.json"), "verify", dir.path()).status.code(), Some(2));
    assert_eq!(run(&["verify"], dir.path()).status.code(), Some(2));
}

#[test]
fn degenerate_frame_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<String> = (0..8)
        .map(|a| {
            let r: Vec<&str> = (0..8).map(|p| if a == p { "0.1" } else { "0" }).collect();
            format!("[{}]", r.join(","))
        })
        .collect();
    let body = format!(
        r#"{{"name": "x", "lattice": {{"active_dims": 1, "points": 8}},
            "frame": {{"kind": "constant", "matrix": [{}]}}, "params": {{"kappa": 0.0}}}}"#,
        rows.join(",")
    );
    let path = write(dir.path(), "degenerate.json", &body);
    let o = run_config(&path, "verify", dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn linear_at_kappa_minus_two_is_the_gr_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["linear", "--kappa", "-2", "--report", "all"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let rep: Value = serde_json::from_slice(&o.stdout).unwrap();
    let extra = &rep["extra"];
    assert!(extra["mu"].as_f64().unwrap().abs() < 1e-12, "{extra}");
    let rows = rep["rows"].as_array().unwrap();
    let gr = rows.iter().find(|r| r["check"] == "gr-proportional").expect("gr row");
    assert_eq!(gr["pass"], true);

    let o = run(&["linear", "--rho", "1", "--mu", "0.5", "--p", "1,0,0,0,0,0,0,0", "--report", "nullspace"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let rep: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["extra"]["gauge_null_dim"], 8);
    assert_eq!(rep["extra"]["null_dim"], 8);

    let o = run(&["linear", "--p", "1", "0", "0", "0", "0", "-1", "0", "0.5", "--kappa", "-3"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(run(&["linear", "--p", "1,2"], dir.path()).status.code(), Some(2));
}

#[test]
fn flow_from_a_torsion_free_start_stays_put() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(&scenarios().join("flow-fixed-point.json"), "flow", dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("flow.csv")).unwrap();
    assert_eq!(csv, String::from_utf8_lossy(&o.stdout));
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "action").unwrap();
    let actions: Vec<f64> = lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect();
    assert_eq!(actions.len(), 6);
    assert!(actions.iter().all(|a| a.abs() < 1e-12), "{actions:?}");
}

#[test]
fn flow_descends_and_writes_a_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(&scenarios().join("flow-near-flat.json"), "flow", dir.path());
    assert_eq!(o.status.code(), Some(0));
    let snap = spin7_fields::Snapshot::read(&dir.path().join("final.snap")).unwrap();
    assert_eq!(snap.generation, 50);
    assert_eq!(snap.frames.len(), 32);
}

#[test]
fn shipped_scenarios_roundtrip() {
    for entry in std::fs::read_dir(scenarios()).unwrap() {
        let path = entry.unwrap().path();
        let sc = Scenario::load(&path).unwrap();
        let back = Scenario::from_json(&sc.to_json()).unwrap();
        assert_eq!(back, sc, "{}", path.display());
    }
}

#[test]
fn reruns_are_bitwise_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let config = scenarios().join("single-mode.json");
    let strip = |v: Value| {
        let mut v = v;
        v.as_object_mut().unwrap().remove("timings");
        v
    };
    for sub in ["residual", "flow"] {
        let oa = run_config(&config, sub, a.path());
        let ob = run_config(&config, sub, b.path());
        assert_eq!(oa.stdout, ob.stdout, "{sub}");
        assert_eq!(strip(report(a.path())), strip(report(b.path())), "{sub}");
    }
}
