use std::process::{Command, Output};

fn nlkg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlkg")).args(args).output().unwrap()
}

#[test]
fn print_config_exits_zero_with_overrides_applied() {
    let out = nlkg(&["stability", "--print-config", "--set", "grid.n=1024", "--set", "seeds=[3]"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["grid"]["n"], 1024);
    assert_eq!(v["seeds"], serde_json::json!([3]));
    assert_eq!(v["experiment"], "stability");
}

#[test]
fn config_errors_exit_two() {
    assert_eq!(nlkg(&["evolve", "--set", "grid.nn=3"]).status.code(), Some(2));
    assert_eq!(nlkg(&["evolve", "--set", "evolution.cfl=1.5"]).status.code(), Some(2));
    assert_eq!(nlkg(&["evolve", "--config", "/nonexistent/cfg.json"]).status.code(), Some(2));
    assert_eq!(nlkg(&["stability", "--set", "params.0.omega=0.5"]).status.code(), Some(2));
    assert_eq!(nlkg(&["ground-state", "--set", "params.0.p=9"]).status.code(), Some(2));
    assert_ne!(nlkg(&["no-such-experiment"]).status.code(), Some(0));
}

#[test]
fn config_file_layer_and_report_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"params": [{"d": 3, "p": 3, "gamma": 1, "omega": 0.5}], "grid": {"n": 2048}}"#).unwrap();
    let out_dir = dir.path().join("out");
    let out = nlkg(&["ground-state", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("PASS d3_p3_g1_w0.5/residual"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["config"]["grid"]["n"], 2048);
    assert!(out_dir.join("ground-state").join("d3_p3_g1_w0.5").exists());

    std::fs::write(&cfg, r#"{"experiment": "evolve"}"#).unwrap();
    assert_eq!(nlkg(&["ground-state", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn failing_checks_exit_one() {
    let out = nlkg(&["stability", "--set", "seeds=[0]", "--set", "deltas=[0.01]", "--set", "epsilon=1e-6", "--set", "retry=false",
        "--set", "grid.n=1024", "--set", "evolution.t_end=2"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));
}
