use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_coarse-manifold"));
    c.env("COARSE_MANIFOLD_THREADS", "2");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn toy_simulate_on_analytic_graph_matches_table() {
    let model = configs().join("toy_analytic_stable.json");
    let o = run(&[
        "--no-timestamp",
        "--set",
        "model=\"toy\"",
        "simulate",
        "--init",
        "0.2,0.2",
        "--on-manifold",
        model.to_str().unwrap(),
        "--steps",
        "5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&stdout(&o));
    let x3: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    // two-term graph a02 x2² + a21 x1² x2 iterated by the exact map
    let oracle = {
        let (mut x1, mut x2) = (0.2f64, 0.2f64);
        let mut x3 = -4.0 / 7.0 * x2 * x2 + 32.0 / 119.0 * x1 * x1 * x2;
        let mut out = vec![x3];
        for _ in 0..5 {
            let n = (-0.5 * x1, -0.5 * x2 + x1 * x1, 2.0 * x3 + x2 * x2);
            (x1, x2, x3) = n;
            out.push(x3);
        }
        out
    };
    assert_eq!(x3.len(), 6);
    for (a, b) in x3.iter().zip(&oracle) {
        assert!((a - b).abs() <= 5e-6 * b.abs().max(1e-3), "{a} vs {b}");
    }
    assert_eq!(rows[0][4], "-0.0207059");
}

#[test]
fn meanfield_saddle_json() {
    let cfg = configs().join("meanfield.json");
    let o = run(&["--config", cfg.to_str().unwrap(), "saddle"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let x: Vec<f64> = serde_json::from_value(v["x"].clone()).unwrap();
    for (a, b) in x.iter().zip([0.2924, 0.0294, 0.6492]) {
        assert!((a - b).abs() < 1e-3, "{x:?}");
    }
    assert_eq!(v["stability"], "saddle");
}

#[test]
fn outputs_are_byte_identical_without_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("toy.json");
    let mut files = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(format!("{name}.json"));
        let o = run(&["--no-timestamp", "--config", cfg.to_str().unwrap(), "fit-stable", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let read = |s: &str| std::fs::read(dir.path().join(format!("{name}.{s}"))).unwrap();
        files.push((read("json"), read("report.json"), read("surface.csv")));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn timestamp_is_the_only_difference() {
    let cfg = configs().join("meanfield.json");
    let cfg = cfg.to_str().unwrap();
    let args = ["simulate", "--init", "0.3,0.03,0.65", "--steps", "3"];
    let with: Vec<&str> = ["--config", cfg].iter().chain(&args).copied().collect();
    let without: Vec<&str> = ["--no-timestamp", "--config", cfg].iter().chain(&args).copied().collect();
    let (a, b) = (stdout(&run(&with)), stdout(&run(&without)));
    assert!(a.starts_with("# generated"));
    assert_eq!(a.lines().skip(1).collect::<Vec<_>>(), b.lines().collect::<Vec<_>>());
}

#[test]
fn fitted_model_round_trips_into_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("toy.json");
    let cfg = configs().join("toy.json");
    let o = run(&["--config", cfg.to_str().unwrap(), "fit-stable", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("toy.report.json")).unwrap()).unwrap();
    assert_eq!(report["converged"], true);
    let surface = std::fs::read_to_string(dir.path().join("toy.surface.csv")).unwrap();
    assert_eq!(csv_rows(&surface).len(), 13 * 13);

    // a full state is projected onto the graph before iterating
    let o = run(&[
        "--no-timestamp",
        "--config",
        cfg.to_str().unwrap(),
        "simulate",
        "--init",
        "0.2,0.2,5.0",
        "--on-manifold",
        out.to_str().unwrap(),
        "--steps",
        "4",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 5);
    let x3: f64 = rows[0][4].parse().unwrap();
    assert!((x3 + 0.0207).abs() < 1e-3, "{x3}");
    // stays near the stable graph: |x3| shrinks rather than doubling
    let last: f64 = rows[4][4].parse().unwrap();
    assert!(last.abs() < 0.02);
}

#[test]
fn continuation_reports_two_flips() {
    let cfg = configs().join("meanfield.json");
    let o = run(&[
        "--no-timestamp",
        "--config",
        cfg.to_str().unwrap(),
        "continue",
        "--param",
        "beta",
        "--from",
        "20",
        "--to",
        "21.5",
        "--ds",
        "0.05",
    ]);
    assert!(o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.matches("stability flip").count(), 2, "{err}");
    let rows = csv_rows(&stdout(&o));
    assert!(rows.len() > 20);
    assert_eq!(rows[0][0], "20.0000");
}

#[test]
fn ode_manifold_writes_loadable_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ode.json");
    let cfg = configs().join("meanfield.json");
    let o = run(&["--config", cfg.to_str().unwrap(), "ode-manifold", "--kind", "unstable", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let model = coarse_manifold::ManifoldModel::load(&out).unwrap();
    assert_eq!(model.input_dim(), 2);
    assert_eq!(model.basis.len(), 7);
}

#[test]
fn exit_codes() {
    let mf = configs().join("meanfield.json");
    let mf = mf.to_str().unwrap();
    assert_eq!(run(&["--set", "bogus=1", "saddle"]).status.code(), Some(2));
    assert_eq!(run(&["--set", "horizon=-1", "saddle"]).status.code(), Some(2));
    assert_eq!(run(&["--config", "/nonexistent.json", "saddle"]).status.code(), Some(2));
    assert_eq!(run(&["--config", mf, "ode-manifold", "--kind", "sideways"]).status.code(), Some(2));
    assert_eq!(run(&["--set", "model=\"toy\"", "ode-manifold", "--kind", "stable"]).status.code(), Some(2));
    assert_eq!(run(&["--config", mf, "fit-stable"]).status.code(), Some(2));
    // Newton cannot converge in one step
    let o = run(&["--config", mf, "--set", "max_iter=1", "saddle"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    // infeasible coverages
    let o = run(&["--config", mf, "--set", "model=\"kmc\"", "--set", "width=8", "--set", "height=8", "--set", "x0=[0.9,0.9,0.9]", "saddle"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn set_overrides_file_values() {
    let cfg = configs().join("meanfield.json");
    let o = run(&["--config", cfg.to_str().unwrap(), "--set", "beta=20.1", "saddle"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["p"][0], 20.1);
    assert_eq!(v["stability"], "stable");
}

#[test]
fn malformed_config_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"model\": \"toy\",\n  \"beta\": ,\n}\n").unwrap();
    let o = run(&["--config", path.to_str().unwrap(), "saddle"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}
