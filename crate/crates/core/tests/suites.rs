use std::process::Command;

use parabolic_uniqueness::suite::{run_suite, Params, SuiteConfig, SuiteName};

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cli"))
}

#[test]
fn weight_suite_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.json");
    let cfg = SuiteConfig {
        suite: SuiteName::Weight,
        params: Params::default(),
        output_path: Some(path.clone()),
    };
    let r = run_suite(&cfg).unwrap();
    assert!(r.passed, "{:?}", r.failures().collect::<Vec<_>>());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, r.to_json().unwrap());
}

#[test]
fn coeffs_suite_with_mollifier_sweep() {
    let params = Params {
        verify: Some("all".into()),
        depth: Some(3),
        ..Params::default()
    };
    let r = run_suite(&SuiteConfig {
        suite: SuiteName::Coeffs,
        params,
        output_path: None,
    })
    .unwrap();
    assert!(r.passed);
    assert!(r.checks.iter().any(|c| c.name == "mollifier/c1_drift"));
}

#[test]
fn non_osgood_modulus_is_an_error() {
    let params = Params {
        mu: Some("sqrt".into()),
        ..Params::default()
    };
    assert!(run_suite(&SuiteConfig {
        suite: SuiteName::Weight,
        params,
        output_path: None
    })
    .is_err());
}

#[test]
fn cli_exit_codes() {
    let ok = cli()
        .args([
            "weight", "--mu", "log", "--alpha", "0.5", "--T", "1", "--gamma", "8",
        ])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["passed"], true);

    let bad_flag = cli().args(["weight", "--gama", "8"]).output().unwrap();
    assert_eq!(bad_flag.status.code(), Some(2));
    let bad_mu = cli().args(["weight", "--mu", "cubic"]).output().unwrap();
    assert_eq!(bad_mu.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "gama = 8\n").unwrap();
    let bad_cfg = cli()
        .args(["weight", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(bad_cfg.status.code(), Some(2));
}

#[test]
fn cli_emits_counterexample_grid() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.csv");
    let report = dir.path().join("cx.json");
    let out = cli()
        .args([
            "counterexample",
            "--N",
            "1000",
            "--j0",
            "1700",
            "--verify",
            "none",
            "--emit-grid",
        ])
        .arg(&grid)
        .arg("--report")
        .arg(&report)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&grid).unwrap();
    assert!(text.starts_with("t,x1,x2,u,log_scale,l,b1,b2,c\n"));
    assert!(text.lines().count() > 10);
}
