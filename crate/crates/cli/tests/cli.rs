use std::path::Path;
use std::process::{Command, Output};

fn kornlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kornlab")).args(args).current_dir(dir).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn validate_prints_the_completed_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.cfg", "experiment = hardy\n");
    let out = kornlab(&["validate", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("hardy.elements = 64, 256, 1024, 2048"));
    assert!(text.contains("mesh.ny = 64"));
}

#[test]
fn validation_failure_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "experiment = interpolation\nweight.terms = 1:0.6\nnope = 1\n");
    let out = kornlab(&["run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("unknown key `nope`"), "{err}");
    let cfg = write(dir.path(), "beta.cfg", "experiment = separation\nweight.beta = 0.1\n");
    assert_eq!(kornlab(&["validate", &cfg], dir.path()).status.code(), Some(2));
}

#[test]
fn run_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "h.cfg", "experiment = hardy\nhardy.gamma = 0, 0.5\nhardy.elements = 16\n");
    let out_dir = dir.path().join("out");
    let o = out_dir.to_str().unwrap();
    let out = kornlab(&["run", &cfg, "--out", o], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 2);
    assert!(json["rows"][0]["value"].as_f64().unwrap() <= 4.0);
    let out = kornlab(&["run", &cfg, "--out", o, "--format", "csv", "--threads", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(out_dir.join("report.csv")).unwrap();
    assert!(csv.starts_with("label,h,value,mu_star,"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn forced_failure_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "i.cfg",
        "experiment = interpolation\nmesh.nx = 2\nmesh.ny = 4\nmesh.q = 1\nrun.fail_on_h = 0.2\n",
    );
    let out = kornlab(&["oracle", &cfg, "--format", "csv", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let csv = std::fs::read_to_string(dir.path().join("o/report.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| l.starts_with("interpolation,")).count(), 3);
    assert!(csv.contains("failure,0.2,"));
}

#[test]
fn seed_flag_overrides_and_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "k.cfg", "experiment = ko-lemma\nko.samples = 20\nseed = 1\n");
    let run = |seed: &str, out: &str| {
        let o = kornlab(&["run", &cfg, "--seed", seed, "--out", out], dir.path());
        assert_eq!(o.status.code(), Some(0));
        let mut v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(out).join("report.json")).unwrap()).unwrap();
        v["wall_clock_seconds"] = serde_json::Value::Null;
        v
    };
    let (a, b, c) = (run("5", "o"), run("5", "o"), run("6", "o"));
    assert_eq!(a, b);
    assert_ne!(a["rows"], c["rows"]);
    assert!(a["config"].as_str().unwrap().contains("seed = 5"));
}
