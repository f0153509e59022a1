use std::fs;
use std::path::Path;
use std::process::Command;

use hyperrh_cli::report::{emit_plotdata, Report};
use hyperrh_cli::parse_resolution;

fn hyperrh(args: &[&str], out: &Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_hyperrh"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs");
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stdout).into_owned())
}

fn summary(dir: &Path, command: &str) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join(format!("{command}.json"))).unwrap()).unwrap()
}

#[test]
fn counterexample_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout) = hyperrh(&["counterexample", "--m", "4"], dir.path());
    assert_eq!(code, 0, "{stdout}");
    let s = summary(dir.path(), "counterexample");
    assert_eq!(s["passed"], true);
    assert_eq!(s["certificate"]["harmonicity_residual"], 0.0);
    assert_eq!(s["certificate"]["laplacian"], -8.0);
    assert_eq!(s["certificate"]["violates_maximum_principle"], true);
    // No plot series: a header-only plot file is still written.
    assert_eq!(fs::read_to_string(dir.path().join("counterexample-empty.plot.csv")).unwrap(), "x,y\n");
}

#[test]
fn zero_jet_solve_has_zero_probes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("zero.json");
    fs::write(
        &cfg,
        r#"{"jet": {"analytic": "zero"}, "resolution": {"mesh": 2, "whitney_depth": 3}, "derivative_probes": 0,
            "boundary_samples": 4}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let (code, stdout) = hyperrh(&["solve", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(code, 0, "{stdout}");
    let mut rdr = csv::Reader::from_path(out.join("solve-probes.csv")).unwrap();
    let header = rdr.headers().unwrap().clone();
    let first = header.iter().position(|h| h == "u").unwrap();
    let mut rows = 0;
    for r in rdr.records() {
        let r = r.unwrap();
        assert!(r.iter().skip(first).all(|v| v.parse::<f64>().unwrap() == 0.0));
        rows += 1;
    }
    assert!(rows >= 5);
}

#[test]
fn jet_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = hyperrh::geometry::mesh::icosphere([0.0; 3], 1.0, 2).unwrap();
    let f = hyperrh::AnalyticField::by_name("x1", 3).unwrap();
    let jet = hyperrh::geometry::jet::jet_from_function(&f, &mesh, 1.0).unwrap();
    jet.write_csv(fs::File::create(dir.path().join("jet.csv")).unwrap()).unwrap();
    let cfg = dir.path().join("csv.json");
    fs::write(
        &cfg,
        r#"{"mode": "smooth", "jet": {"csv": "jet.csv"}, "resolution": {"mesh": 2, "whitney_depth": 3}, "derivative_probes": 0}"#,
    )
    .unwrap();
    let (code, stdout) = hyperrh(&["solve", "--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert!(code == 0 || code == 1, "{stdout}");
    assert!(stdout.contains("trace.first"));
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(hyperrh(&["solve", "--config", bad.to_str().unwrap()], dir.path()).0, 2);
    let unknown = dir.path().join("unknown.json");
    fs::write(&unknown, r#"{"no_such_field": 1}"#).unwrap();
    assert_eq!(hyperrh(&["jump-test", "--config", unknown.to_str().unwrap()], dir.path()).0, 2);
    let missing = dir.path().join("missing.json");
    assert_eq!(hyperrh(&["dimension", "--config", missing.to_str().unwrap()], dir.path()).0, 2);
    assert_eq!(hyperrh(&["verify-kernels", "--resolution", "3x"], dir.path()).0, 2);
    assert_eq!(hyperrh(&["counterexample", "--m", "3"], dir.path()).0, 2);
    assert_eq!(hyperrh(&["no-such-command"], dir.path()).0, 2);
    // d outside (2, 3) is rejected before solving.
    let d = dir.path().join("d.json");
    fs::write(&d, r#"{"d": 3.5, "resolution": {"mesh": 1, "whitney_depth": 2}}"#).unwrap();
    assert_eq!(hyperrh(&["solve", "--config", d.to_str().unwrap()], dir.path()).0, 2);
}

#[test]
fn tolerance_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.json");
    fs::write(&cfg, r#"{"sphere_level": 2, "jump_tol": 1e-9, "probes": 4}"#).unwrap();
    let (code, stdout) = hyperrh(&["jump-test", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code, 1, "{stdout}");
    assert!(stdout.contains("FAIL jump"));
    assert_eq!(summary(dir.path(), "jump-test")["passed"], false);
}

#[test]
fn threads_variable_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_hyperrh"))
        .args(["counterexample", "--out"])
        .arg(dir.path())
        .env("HYPERRH_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_hyperrh"))
        .args(["counterexample", "--out"])
        .arg(dir.path())
        .env("HYPERRH_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn dimension_plot_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("dim.json");
    fs::write(
        &cfg,
        r#"{"koch_level": 2, "koch_rows": 6, "koch_radii": [0.3, 0.1, 4], "sphere_level": 3, "sphere_radii": [0.5, 0.15, 4],
            "whitney_depth": 3, "trend_level": 5,
            "extension": {"trace_levels": [1, 2], "growth_level": 2, "growth_distances": [0.4, 0.2], "partition_points": 20}}"#,
    )
    .unwrap();
    let (code, _) = hyperrh(&["dimension", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(code == 0 || code == 1);
    let body = fs::read_to_string(dir.path().join("dimension-d-sum-above.plot.csv")).unwrap();
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("depth,partial_d_sum"));
    let partial: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(partial.len() >= 4);
    assert!(partial.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn empty_report_plot_is_header_only() {
    let r = Report::new("noop", 1);
    let files = emit_plotdata(&r);
    assert_eq!(files.len(), 1);
    assert_eq!(files[0].1, "x,y\n");
}

#[test]
fn resolution_factors() {
    assert_eq!(parse_resolution("1x"), Ok(0));
    assert_eq!(parse_resolution("2x"), Ok(1));
    assert_eq!(parse_resolution("4x"), Ok(2));
    assert!(parse_resolution("3x").is_err());
    assert!(parse_resolution("x").is_err());
}
