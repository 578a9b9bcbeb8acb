use nlkg_core::monitors::Status;
use nlkg_core::LabError;
use nlkg_lab::{ConfigError, Experiment, ExperimentConfig, Report, Row, RunError};
use serde_json::json;

#[test]
fn row_semantics() {
    assert_eq!(Row::le("a", 1.0, 1.0).status, Status::Pass);
    assert_eq!(Row::le("a", 1.5, 1.0).status, Status::Fail);
    assert_eq!(Row::le("a", f64::NAN, 1.0).status, Status::Fail);
    assert_eq!(Row::ge("b", 2.0, 1.0).status, Status::Pass);
    assert_eq!(Row::ge("b", 0.5, 1.0).status, Status::Fail);
    assert!(Row::flag("c", true, 0.0).passed());
    assert!(!Row::flag("c", false, 0.0).passed());
    let info = Row::info("d", -3.0).note("context");
    assert!(info.passed());
    assert_eq!(info.note, "context");
}

#[test]
fn report_status_table_and_json() {
    let cfg = ExperimentConfig::default_for(Experiment::Evolve);
    let mut report = Report::new(&cfg, "demo");
    report.checks.push(Row::le("x/drift", 1e-9, 1e-5));
    report.checks.push(Row::info("x/extra", 4.0).note("context"));
    let report = report.finish();
    assert!(report.passed);
    assert_eq!(report.checks_with("x/").len(), 2);
    assert!(report.check("x/drift").is_some());
    let table = report.table();
    assert!(table.contains("PASS x/drift"));
    assert!(table.contains("INFO x/extra"));
    assert!(table.contains("(context)"));
    assert!(table.ends_with("all checks pass\n"));

    let mut failing = Report::new(&cfg, "demo");
    failing.checks.push(Row::ge("y", 0.0, 1.0));
    let failing = failing.finish();
    assert!(!failing.passed);
    assert!(failing.table().contains("FAIL y"));

    let dir = tempfile::tempdir().unwrap();
    report.write(dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let back: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(back.checks.len(), 2);
    assert_eq!(back.config, cfg);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["experiment"], json!("evolve"));
    assert_eq!(v["checks"][0]["status"], json!("pass"));
}

#[test]
fn exit_codes() {
    assert_eq!(RunError::from(ConfigError("x".into())).exit_code(), 2);
    assert_eq!(RunError::from(LabError::Domain("x".into())).exit_code(), 2);
    assert_eq!(RunError::from(LabError::Constraint("x".into())).exit_code(), 2);
    assert_eq!(RunError::from(LabError::Numerical("x".into())).exit_code(), 3);
}

#[test]
fn named_threshold_override_and_regime_guards() {
    let mut cfg = ExperimentConfig::default_for(Experiment::Instability);
    cfg.apply_override("params.0.p=2").unwrap();
    cfg.apply_override("params.0.omega=omega_c").unwrap();
    let m = cfg.model().unwrap();
    assert!((m.omega - 0.5f64.sqrt()).abs() < 1e-15);

    let mut stab = ExperimentConfig::default_for(Experiment::Stability);
    stab.apply_override("params.0.omega=0.5").unwrap();
    assert_eq!(nlkg_lab::run(&stab).unwrap_err().exit_code(), 2);

    let mut inst = ExperimentConfig::default_for(Experiment::Instability);
    inst.apply_override("params.0.p=2").unwrap();
    inst.apply_override("params.0.omega=0.8").unwrap();
    assert_eq!(nlkg_lab::run(&inst).unwrap_err().exit_code(), 2);
}

#[test]
fn print_config_roundtrips_through_file_layer() {
    for e in Experiment::ALL {
        let cfg = ExperimentConfig::default_for(e);
        let v = serde_json::to_value(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_layers(e, Some(&v)).unwrap(), cfg);
    }
    assert!(ExperimentConfig::from_layers(Experiment::Evolve, Some(&json!([1, 2]))).is_err());
    assert!(ExperimentConfig::from_layers(Experiment::Evolve, Some(&json!({"radii": [30.0]}))).is_err());
}
