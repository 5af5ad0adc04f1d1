use std::path::Path;
use std::process::{Command, Output};

use roymax::{RationalPoly, RoyReport};
use roymax_cli::{CdfReport, McReport, PolyReport, QuantileReport, Table1Row};

fn roymax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roymax"))
        .args(args)
        .env_remove("ROYMAX_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = roymax(args);
    assert!(o.status.success(), "{args:?}: {}", stderr(&o));
    stdout(&o)
}

fn exit_code(args: &[&str]) -> i32 {
    roymax(args).status.code().unwrap()
}

fn json<T: serde::de::DeserializeOwned>(args: &[&str]) -> (T, String) {
    let text = ok(args);
    (serde_json::from_str(&text).unwrap(), text)
}

#[test]
fn cdf_at_upper_five_percent_point() {
    let (report, _): (CdfReport, _) = json(&["cdf", "--m", "5", "--n", "3", "--p", "10", "--x", "7.63", "--format", "json"]);
    assert!((report.value.probability - 0.950).abs() < 5e-4);
    assert_eq!(report.value.route, roymax::Route::Finite);
}

#[test]
fn cdf_rejects_non_positive_x() {
    assert_eq!(exit_code(&["cdf", "--m", "5", "--n", "3", "--p", "10", "--x", "0"]), 2);
    assert_eq!(exit_code(&["cdf", "--m", "5", "--n", "3", "--p", "10", "--x", "-1"]), 2);
}

#[test]
fn cdf_with_scale_matches_library() {
    let args = ["cdf", "--m", "3", "--n", "2", "--p", "10", "--sigma", "0.333333,0.5,1", "--x", "1.0", "--format", "csv"];
    let text = ok(&args);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,cdf"));
    let value: f64 = lines.next().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    let dims = roymax::ProblemDims::real(3, 2, 10).unwrap();
    let scale = roymax::ScaleSpectrum::new(vec![0.333333, 0.5, 1.0]).unwrap();
    let expected = roymax::cdf_largest_finite(1.0, &dims, &scale).unwrap().probability;
    assert_eq!(value, expected);
}

#[test]
fn cdf_routes_and_numerical_failure() {
    let base = ["cdf", "--m", "3", "--n", "2", "--p", "10", "--sigma", "0.333333,0.5,1"];
    let mut args = base.to_vec();
    args.extend(["--x", "0.1", "--route", "theorem"]);
    assert!(ok(&args).contains("route theorem"));
    let mut args = base.to_vec();
    args.extend(["--x", "5", "--route", "theorem"]);
    assert_eq!(exit_code(&args), 3);
    let mut args = base.to_vec();
    args.extend(["--x", "1", "--route", "identity"]);
    assert_eq!(exit_code(&args), 2);
}

#[test]
fn bad_dimensions_and_sigma_are_usage_errors() {
    assert_eq!(exit_code(&["cdf", "--m", "3", "--n", "3", "--p", "10", "--x", "1"]), 2);
    assert_eq!(exit_code(&["cdf", "--m", "3", "--n", "2", "--p", "10", "--beta", "3", "--x", "1"]), 2);
    assert_eq!(exit_code(&["cdf", "--m", "3", "--n", "2", "--p", "10", "--sigma", "1,2", "--x", "1"]), 2);
    assert_eq!(exit_code(&["cdf", "--m", "3", "--n", "2", "--p", "10", "--sigma", "1,-2,3", "--x", "1"]), 2);
    assert_eq!(exit_code(&["cdf", "--m", "3"]), 2);
}

#[test]
fn quantiles_from_the_percentile_table() {
    let (q, _): (QuantileReport, _) = json(&["quantile", "--m", "5", "--n", "4", "--p", "20", "--alpha", "0.5", "--format", "json"]);
    assert!((q.quantile.x - 0.82).abs() < 0.005);
    let (q, _): (QuantileReport, _) = json(&["quantile", "--m", "15", "--n", "4", "--p", "20", "--alpha", "0.99", "--format", "json"]);
    assert!((q.quantile.x - 45.6).abs() < 0.05);
    assert!(q.quantile.achieved_error <= 1e-10);
    assert_eq!(exit_code(&["quantile", "--m", "5", "--n", "4", "--p", "20", "--alpha", "1.5"]), 2);
}

#[test]
fn polynomial_text_and_json() {
    let text = ok(&["poly", "--m", "15", "--n", "3", "--p", "20"]);
    assert!(text.contains("constant: 128877/8"));
    assert!(text.trim_end().ends_with("t^6: 260/1083"));

    let (report, raw): (PolyReport, _) = json(&["poly", "--m", "5", "--n", "3", "--p", "10", "--format", "json"]);
    let poly: &RationalPoly = &report.polynomial;
    assert_eq!(roymax::specialfn::exact::format_rational(&poly.constant), "693/4");
    assert_eq!(roymax::specialfn::exact::format_rational(poly.coefficients.last().unwrap()), "5/198");
    let reparsed: PolyReport = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(reparsed, report);
    assert!(raw.contains("\"coefficients\""));

    let o = roymax(&["poly", "--m", "5", "--n", "3", "--p", "11"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("non-negative integer"));
}

#[test]
fn plot_data_writes_monotone_curve() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_roymax"))
        .args(["plot-data", "--m", "3", "--n", "2", "--p", "10", "--sigma", "0.3333333333333333,0.5,1", "--from", "0.01", "--to", "20"])
        .env("ROYMAX_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let path = dir.path().join("cdf_m3_n2_p10_beta1.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,cdf"));
    let values: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 200);
    assert!(values.windows(2).all(|w| w[1] >= w[0]));
    assert!(values[0] < 1e-3 && values[199] > 0.99);
    assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn plot_data_grid_handling() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("one.csv");
    ok(&["plot-data", "--m", "5", "--n", "3", "--p", "10", "--grid", "2.5", "-o", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 2);
    let row = text.lines().nth(1).unwrap();
    // 17 significant digits in scientific notation
    assert_eq!(row.split(',').next().unwrap(), "2.5000000000000000e0");

    assert_eq!(exit_code(&["plot-data", "--m", "5", "--n", "3", "--p", "10", "--grid", "1,0.5", "-o", out.to_str().unwrap()]), 2);
    assert_eq!(exit_code(&["plot-data", "--m", "5", "--n", "3", "--p", "10", "--grid", "1,1", "-o", out.to_str().unwrap()]), 2);
}

#[test]
fn plot_data_reports_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let target = blocker.join("sub").join("out.csv");
    let o = roymax(&["plot-data", "--m", "5", "--n", "3", "--p", "10", "--grid", "1", "-o", target.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains(Path::new("file").to_str().unwrap()));
}

#[test]
fn monte_carlo_verification() {
    let (report, _): (McReport, _) = json(&["mc-verify", "--m", "5", "--n", "3", "--p", "10", "--seed", "3", "--format", "json"]);
    assert!(report.pass, "{report:?}");
    assert_eq!(report.samples, 20_000);
    let (report, _): (McReport, _) = json(&["mc-verify", "--mode", "moore-penrose", "--p", "10", "--m", "5", "--n", "3", "--format", "json"]);
    assert!(report.pass, "{report:?}");
    assert_eq!(report.mode, "moore-penrose");
    let again: McReport = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(again, report);
}

#[test]
fn monte_carlo_is_deterministic_and_warns_on_tiny_samples() {
    let args = ["mc-verify", "--m", "3", "--n", "2", "--p", "6", "--beta", "2", "-N", "500", "--seed", "9", "--format", "csv"];
    assert_eq!(ok(&args), ok(&args));
    let o = roymax(&["mc-verify", "--m", "5", "--n", "3", "--p", "10", "-N", "10"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("negligible power"));
}

#[test]
fn monte_carlo_dump() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("draws.csv");
    ok(&["mc-verify", "--m", "5", "--n", "3", "--p", "10", "-N", "300", "--dump", path.to_str().unwrap()]);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 301);
}

#[test]
fn roy_test_decisions() {
    let (report, text): (RoyReport, _) = json(&[
        "roy-test", "--groups", "4", "--variables", "4", "--per-group", "8", "--roots", "2.73,0.54,0.033", "--format", "json",
    ]);
    assert!(report.reject);
    assert!((report.proportion - 0.827).abs() < 5e-4);
    assert_eq!((report.dims.m, report.dims.n, report.dims.p), (4, 3, 28));
    let again: RoyReport = serde_json::from_str(&text).unwrap();
    assert_eq!(again, report);

    let human = ok(&["roy-test", "--groups", "4", "--variables", "4", "--per-group", "8", "--observed", "0.5"]);
    assert!(human.contains("FAIL-TO-REJECT"));

    let o = roymax(&["roy-test", "--groups", "6", "--variables", "4", "--per-group", "8", "--observed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("less than or equal to the number of variables"));
}

#[test]
fn table_reproduction() {
    let (rows, _): (Vec<Table1Row>, _) = json(&["table1", "--format", "json"]);
    assert_eq!(rows.len(), 10);
    let expected = [0.27, 0.37, 0.82, 1.86, 2.67, 2.33, 3.16, 7.51, 24.4, 45.6];
    for (row, want) in rows.iter().zip(expected) {
        let tol = if want > 20.0 { 0.05 } else { 0.00505 };
        assert!((row.x - want).abs() <= tol, "{row:?}");
    }
    assert!(ok(&["table1"]).contains("m = 15"));
}
