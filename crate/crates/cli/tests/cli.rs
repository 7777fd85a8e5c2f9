use std::process::{Command, Output};

fn run(args: &[&str], env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_morse-bnd"));
    cmd.args(args).env_remove("MORSE_TOL_OVERRIDES");
    if let Some(v) = env {
        cmd.env("MORSE_TOL_OVERRIDES", v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn list_prints_the_catalog() {
    let o = run(&["list"], None);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 5);
    assert!(out.lines().any(|l| l == "moebius"));
}

#[test]
fn annulus_json_report() {
    let o = run(&["analyze", "annulus", "--complex", "N", "--format", "json"], None);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        ["certificates", "complexes", "critical_points", "homology", "ledger", "manifold", "meta", "pairing", "polynomials"]
    );
    assert_eq!(v["homology"]["FN"]["betti"], serde_json::json!([1, 1, 0]));
    assert!(v["homology"].get("FD").is_none());
    // round trip keeps everything
    let again: serde_json::Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(again, v);
}

#[test]
fn json_is_byte_identical_across_runs() {
    let args = ["analyze", "moebius", "--format", "json", "--seed", "3"];
    assert_eq!(run(&args, None).stdout, run(&args, None).stdout);
}

#[test]
fn moebius_twisted_text_report() {
    let o = run(&["analyze", "moebius", "--coefficients", "orientation", "--complex", "N"], None);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("FN_or")).unwrap();
    assert!(line.contains("[Z/2, 0, 0]"), "{line}");
    assert!(!out.lines().any(|l| l.starts_with("FD")));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["analyze", "nosuch"], None).status.code(), Some(1));
    assert_eq!(run(&["analyze", "disk", "--complex", "X"], None).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"], None).status.code(), Some(1));
    assert_eq!(run(&["analyze", "disk"], Some(r#"{"no_such_tolerance": 1}"#)).status.code(), Some(1));
    assert_eq!(run(&["analyze", "interval", "--svg", "/tmp/never.svg"], None).status.code(), Some(1));
}

#[test]
fn failed_math_exits_two() {
    let o = run(&["analyze", "annulus"], Some(r#"{"t_max": 0.01}"#));
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["analyze", "annulus", "--tol", "t_max=0.01"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn svg_portrait() {
    let path = std::env::temp_dir().join(format!("morse-bnd-{}.svg", std::process::id()));
    let o = run(&["analyze", "annulus", "--svg", path.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    let svg = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(svg.starts_with("<svg") && svg.contains(r#"width="800" height="800""#));
    assert!(svg.matches("<polyline").count() >= 4);
    assert!(svg.contains(">N1<") && svg.contains(">D2<"));
}

#[test]
fn verify_passes_for_two_seeds() {
    for seed in ["0", "7"] {
        let o = run(&["verify", "--seed", seed], None);
        let out = stdout(&o);
        assert_eq!(o.status.code(), Some(0), "{out}");
        assert_eq!(out.lines().filter(|l| l.contains("PASS")).count(), 10);
    }
}

#[test]
fn verify_reports_failure() {
    let o = run(&["verify"], Some(r#"{"t_max": 0.01}"#));
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("FAIL"));
}
