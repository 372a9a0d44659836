use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn anslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anslab"))
        .args(args)
        .env("ANSLAB_JOBS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn thm4_unit_inputs_print_one() {
    let o = anslab(&["bounds", "--formula", "thm4", "--nu3", "1", "--norm-hs10", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().next(), Some("1"));
}

#[test]
fn thm1_infty_from_flags() {
    let o = anslab(&["bounds", "--formula", "thm1_infty", "--nu1", "2", "--nu2", "2", "--nu3", "2", "--norm-linf", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: f64 = stdout(&o).lines().next().unwrap().parse().unwrap();
    assert_eq!(v, 0.5);
}

#[test]
fn bounds_from_config_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "q.json",
        r#"{"formula": {"id": "leray", "p": 6}, "nu": {"nu1": 2, "nu2": 2, "nu3": 2}, "norms": {"Lp": 1}}"#,
    );
    let out = dir.path().join("out");
    let o = anslab(&["bounds", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: f64 = stdout(&o).lines().next().unwrap().parse().unwrap();
    assert!((v - 8.0).abs() < 1e-12);
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "bounds");
    assert_eq!(m["config"]["formula"]["id"], "leray");
    assert!(out.join("bound.json").exists());
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", "{\n  \"formula\": {\"id\": \"thm4\"},\n  \"nu\": [\n}");
    let o = anslab(&["bounds", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("line 4") && e.contains("column"), "{e}");
}

#[test]
fn unknown_config_key_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "q.json",
        r#"{"formula": {"id": "thm4"}, "nu": {"nu1": 1, "nu2": 1, "nu3": 1}, "norms": {}, "extra": 1}"#,
    );
    let o = anslab(&["bounds", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("extra"));
}

#[test]
fn unknown_flag_and_bad_inputs_exit_two() {
    assert_eq!(anslab(&["bounds", "--bogus"]).status.code(), Some(2));
    assert_eq!(anslab(&["bounds", "--formula", "nope"]).status.code(), Some(2));
    let o = anslab(&["bounds", "--formula", "thm1_finite", "--p", "2", "--norm-lp", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_lists_every_flag() {
    let top = stdout(&anslab(&["--help"]));
    for f in ["--jobs", "--verbose", "simulate", "sweep", "bounds", "verify-inequalities", "lp-check"] {
        assert!(top.contains(f), "missing {f}");
    }
    let b = stdout(&anslab(&["bounds", "--help"]));
    for f in [
        "--formula", "--p", "--alpha", "--c", "--nu1", "--nu2", "--nu3", "--norm-lp", "--norm-l2",
        "--norm-linf", "--norm-b0half", "--norm-grad-b0half", "--norm-hs10", "--norm-hs2", "--config", "--out",
    ] {
        assert!(b.contains(f), "missing {f}");
    }
    let s = stdout(&anslab(&["sweep", "--help"]));
    for f in ["--config", "--out", "--seed", "--grid", "--horizon", "--proxy", "--nu3"] {
        assert!(s.contains(f), "missing {f}");
    }
}

#[test]
fn lp_check_passes_and_records_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lp");
    let o = anslab(&["lp-check", "--grid", "16", "--samples", "10", "--seed", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 5);
    assert_eq!(m["jobs"], 2);
}

#[test]
fn simulate_writes_diagnostics_and_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let o = anslab(&["simulate", "--grid", "8", "--horizon", "0.05", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert!(csv.starts_with("t,E,diss1,diss2,diss3,Linf,B0half,tail_fraction"));
    assert!(out.join("final.ans").exists());
    assert!(out.join("manifest.json").exists());
}

#[test]
fn unwritable_output_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = write(dir.path(), "file", "x");
    let o = anslab(&["simulate", "--grid", "8", "--horizon", "0.01", "--out", &format!("{blocker}/sub")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn heat_flow_sweep_is_censored() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.json",
        r#"{"initial": {"generator": {"kind": "taylor_green"}, "amplitude": {"linf": 1}},
            "grid": 8, "nu1": [0.5], "nu2": [0.5], "nu3": [0.1, 0.5], "horizon": 0.5, "dt": 0.1,
            "sim": {"nonlinear": false}}"#,
    );
    let o = anslab(&["sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.contains(",inf,horizon,")), "{text}");
}

#[test]
fn inequality_suite_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(
        dir.path(),
        "ok.json",
        r#"{"samples": 10, "grid2": 64, "suites": [{"suite": "gn", "variant": {"kind": "l42"}}]}"#,
    );
    let o = anslab(&["verify-inequalities", "--config", &ok]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).starts_with("PASS gn_l42"));
    let strict = write(
        dir.path(),
        "strict.json",
        r#"{"samples": 10, "max_variation": 0.0, "suites": [{"suite": "gn", "variant": {"kind": "l42"}}]}"#,
    );
    let o = anslab(&["verify-inequalities", "--config", &strict]);
    assert_eq!(o.status.code(), Some(1));
}
