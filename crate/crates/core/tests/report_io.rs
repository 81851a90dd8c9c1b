use parabolic_uniqueness::counterexample::{build, default_grid, flip_time, GridRow};
use parabolic_uniqueness::report::{
    read_csv, write_csv, Check, CheckKind, Provenance, VerificationReport,
};
use parabolic_uniqueness::spectral::{SpectralField, TorusGrid, DEFAULT_PERIOD};
use parabolic_uniqueness::suite::{CoefficientSpec, Params, GRID_COLUMNS};
use parabolic_uniqueness::Error;

#[test]
fn grid_csv_round_trip() {
    let data = flip_time(&build(None, 1000).unwrap());
    let rows = default_grid(&data, 3);
    assert!(!rows.is_empty());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    write_csv(&path, GRID_COLUMNS, &rows).unwrap();
    let back: Vec<GridRow> = read_csv(&path).unwrap();
    assert_eq!(back.len(), rows.len());
    let rel = |a: f64, b: f64| {
        if a == b {
            0.0
        } else {
            (a - b).abs() / a.abs().max(b.abs())
        }
    };
    for (a, b) in rows.iter().zip(&back) {
        for (x, y) in [
            (a.t, b.t),
            (a.u, b.u),
            (a.log_scale, b.log_scale),
            (a.l, b.l),
            (a.b1, b.b1),
            (a.b2, b.b2),
            (a.c, b.c),
        ] {
            assert!(rel(x, y) <= 1e-12, "{x} vs {y}");
        }
    }
}

#[test]
fn report_json_round_trip() {
    let checks = vec![
        Check::le("a", CheckKind::Identity, 1e-13, 1e-12),
        Check::gt("b", CheckKind::Fit, 0.5, 0.0),
    ];
    let r = VerificationReport::new(
        "x",
        checks,
        Provenance::new(3, "1d:64"),
        serde_json::json!({"k": [1.0, 2.5]}),
    );
    let back = VerificationReport::from_json(&r.to_json().unwrap()).unwrap();
    assert_eq!(back, r);
    assert!(back.passed);
}

#[test]
fn field_json_round_trip() {
    let g = TorusGrid::new(2, 16, DEFAULT_PERIOD).unwrap();
    let u = SpectralField::from_real_fn(&g, |x| (0.25 * x[0]).sin() * (0.5 * x[1]).cos() + 0.1);
    let back = SpectralField::from_json(&u.to_json().unwrap()).unwrap();
    assert!(back.rel_distance(&u).unwrap() <= 1e-15);
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let err = Params::from_toml("seed = 3\ngama = 8.0\n").unwrap_err();
    assert!(matches!(err, Error::Usage(_)), "{err:?}");
    let ok = Params::from_toml("seed = 3\nT = 0.5\nN = 2000\ngammas = [8.0, 16.0]\n").unwrap();
    assert_eq!(ok.seed, Some(3));
    assert_eq!(ok.t_horizon, Some(0.5));
    assert_eq!(ok.n_intervals, Some(2000));
}

#[test]
fn flags_override_config() {
    let base = Params::from_toml("seed = 3\nalpha = 0.3\n").unwrap();
    let merged = base.merged(Params {
        seed: Some(9),
        ..Params::default()
    });
    assert_eq!(merged.seed, Some(9));
    assert_eq!(merged.alpha, Some(0.3));
}

#[test]
fn coefficient_spec_reads_report_or_bare_spec() {
    let spec = CoefficientSpec {
        family: "synthetic".into(),
        dim: 1,
        alpha: 0.5,
        mu: "log".into(),
        delta: 0.4,
        t_horizon: 1.0,
    };
    let bare = serde_json::to_string(&spec).unwrap();
    assert_eq!(CoefficientSpec::from_json(&bare).unwrap(), spec);
    let wrapped =
        serde_json::json!({"suite": "coeffs", "details": {"coefficient": spec}}).to_string();
    assert_eq!(CoefficientSpec::from_json(&wrapped).unwrap(), spec);
}
