use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hsle(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsle")).args(args).current_dir(dir).output().expect("binary runs")
}

fn ok(out: Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn simulate_trace_unzip_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(hsle(&["sim-sle", "--kappa", "2", "--horizon", "0.5", "--dt", "0.005", "--seed", "3", "-o", "w.csv"], d));
    ok(hsle(&["trace", "w.csv", "-o", "curve.csv"], d));
    ok(hsle(&["unzip", "curve.csv", "-o", "back.csv"], d));
    let read = |name: &str| -> Vec<Vec<f64>> {
        let mut r = csv::Reader::from_path(d.join(name)).unwrap();
        r.records().map(|rec| rec.unwrap().iter().map(|v| v.parse().unwrap()).collect()).collect()
    };
    let (w, back) = (read("w.csv"), read("back.csv"));
    assert_eq!(w.len(), back.len());
    for (a, b) in w.iter().zip(&back) {
        assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9, "{a:?} vs {b:?}");
    }
}

#[test]
fn experiment_layout_and_repeatability() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for tag in ["a", "b"] {
        let stdout = ok(hsle(&["experiment", "sle-variance", "--ensemble", "200", "--tag", tag], d));
        assert!(stdout.contains("PASS"), "{stdout}");
    }
    for f in ["manifest.json", "data.csv", "report.json"] {
        assert!(d.join("out/sle-variance/a").join(f).is_file(), "missing {f}");
    }
    let a = fs::read(d.join("out/sle-variance/a/data.csv")).unwrap();
    let b = fs::read(d.join("out/sle-variance/b/data.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_file_supplies_options_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("run.json"), r#"{"ensemble": 50, "tag": "from-config", "out_root": "results", "seed": 9}"#).unwrap();
    ok(hsle(&["experiment", "zero-capacity", "--config", "run.json"], d));
    let manifest = fs::read_to_string(d.join("results/zero-capacity/from-config/manifest.json")).unwrap();
    let m: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(m["seed"], 9);

    ok(hsle(&["experiment", "zero-capacity", "--config", "run.json", "--tag", "flag"], d));
    assert!(d.join("results/zero-capacity/flag/report.json").is_file());
}

#[test]
fn thread_variable_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_hsle"))
        .args(["experiment", "zero-capacity", "--tag", "t"])
        .env("HSLE_THREADS", "many")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_hsle"))
        .args(["experiment", "zero-capacity", "--tag", "t"])
        .env("HSLE_THREADS", "2")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/zero-capacity/t/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["threads"], 2);
}

#[test]
fn unknown_experiment_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = hsle(&["experiment", "no-such-thing"], dir.path());
    assert!(!out.status.success());
    assert!(ok(hsle(&["experiment", "list"], dir.path())).contains("bc-monotonicity"));
}
