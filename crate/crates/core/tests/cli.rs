use std::path::Path;
use std::process::{Command, Output};

use chaincraft::output::{read_csv, JsonDocument};

fn chaincraft(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaincraft")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> JsonDocument {
    JsonDocument::parse(std::str::from_utf8(&out.stdout).unwrap()).unwrap()
}

#[test]
fn flat_chain_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.csv");
    let out = chaincraft(&[
        "chain",
        "--geometry",
        "flat",
        "--init",
        "0,0,0,1,1",
        "--xmax",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x,y,p,yp,pp,delta,resid");
    assert!(!text.contains('\r'));
    let curve = read_csv(text.as_bytes(), 4).unwrap();
    assert_eq!(curve.last().unwrap().t, 3.0);
}

#[test]
fn projective_chain_reports_small_residual() {
    let out = chaincraft(&["chain", "--expr", "(x*p-y)^3", "--init", "1,0,0,1,0.5", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc.schema_version, "1");
    let resid = doc.report["max_resid"].unwrap();
    assert!(resid < 1e-9, "{resid:e}");
}

#[test]
fn quartic_chain_reports_large_residual() {
    let out = chaincraft(&["chain", "--expr", "p^4", "--init", "0,0,0,1,0.5", "--format", "json"]);
    assert_eq!(code(&out), 0);
    assert!(json(&out).report["max_resid"].unwrap() >= 0.1);
}

#[test]
fn csv_and_json_agree() {
    let args = ["chain", "--expr", "k*p^3", "--param", "k=0.7", "--init", "0,0,0.2,0.9,-0.3"];
    let csv = chaincraft(&args);
    let doc = json(&chaincraft(&[&args[..], &["--format", "json"]].concat()));
    let from_csv = read_csv(csv.stdout.as_slice(), 4).unwrap();
    let from_json = doc.curve();
    assert_eq!(from_csv.len(), from_json.len());
    for (a, b) in from_csv.points.iter().zip(&from_json.points) {
        assert_eq!(a.t.to_bits(), b.t.to_bits());
        for (u, v) in a.state.iter().chain(&a.diag).zip(b.state.iter().chain(&b.diag)) {
            assert_eq!(u.to_bits(), v.to_bits());
        }
    }
}

#[test]
fn usage_errors() {
    assert_eq!(code(&chaincraft(&["chain", "--init", "0,0,0,1,1"])), 64);
    assert_eq!(code(&chaincraft(&["chain", "--geometry", "flat", "--init", "0,0,0,1"])), 64);
    assert_eq!(code(&chaincraft(&["chain", "--geometry", "flat", "--init", "0,0,1,1,0"])), 64);
    assert_eq!(code(&chaincraft(&["chain", "--expr", "p^", "--init", "0,0,0,1,0"])), 64);
    assert_eq!(code(&chaincraft(&["chain", "--expr", "k*p", "--init", "0,0,0,1,0"])), 64);
    assert_eq!(code(&chaincraft(&["homog", "--model", "nope"])), 64);
    assert_eq!(code(&chaincraft(&["--help"])), 0);
    let help = chaincraft(&["chain", "--help"]);
    assert!(String::from_utf8_lossy(&help.stdout).contains("x,y,p,yp,pp,delta,resid"));
}

#[test]
fn unwritable_output_is_a_usage_error() {
    let out = chaincraft(&["chain", "--geometry", "flat", "--init", "0,0,0,1,1", "--out", "/nonexistent/dir/run.csv"]);
    assert_eq!(code(&out), 64);
}

#[test]
fn numerical_failure_exits_2() {
    // log(x) leaves its domain at x = 0.
    let out = chaincraft(&["chain", "--expr", "log(x)", "--init", "-1,0,0,1,0", "--xmax", "1"]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn geodesic_cross_check() {
    let out = chaincraft(&[
        "geodesic",
        "--geometry",
        "flat",
        "--at",
        "0,0,0",
        "--dir",
        "1,2,1",
        "--xmax",
        "1",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    assert!(doc.report["max_chain_dist"].unwrap() < 1e-6);
    assert!(doc.report["max_nullity"].unwrap() < 1e-8);
    assert!(doc.diag_names.iter().any(|n| n == "nullity"));

    let csv = chaincraft(&[
        "geodesic",
        "--expr",
        "p^3",
        "--at",
        "0,0,0.1",
        "--dir",
        "1,0.6,0.2",
        "--xmax",
        "0.5",
        "--oracle",
        "explicit",
    ]);
    assert_eq!(code(&csv), 0);
    assert_eq!(
        String::from_utf8_lossy(&csv.stdout).lines().next().unwrap(),
        "t,x,y,p,tau,xd,yd,pd,td,nullity,delta,chain_dist"
    );
}

#[test]
fn vertical_start_is_rejected() {
    let out = chaincraft(&["geodesic", "--geometry", "flat", "--at", "0,0,0", "--dir", "0,0,0"]);
    assert_eq!(code(&out), 64);
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-vertical"));
}

fn svg_of(args: &[&str], path: &Path) -> String {
    let out = chaincraft(&[args, &["--svg", path.to_str().unwrap()]].concat());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn circle_chain_svg_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["homog", "--model", "circles-se2", "--c", "1"];
    let a = svg_of(&args, &dir.path().join("a.svg"));
    let b = svg_of(&args, &dir.path().join("b.svg"));
    assert_eq!(a, b);
    assert!(a.starts_with("<?xml"));
    assert_eq!(a.matches("<polyline").count(), 1);
    assert!(a.matches("<line").count() >= 20, "direction whiskers");
    assert!(a.trim_end().ends_with("</svg>"));
}

#[test]
fn model_plots_have_expected_structure() {
    let dir = tempfile::tempdir().unwrap();
    let hooke = svg_of(&["homog", "--model", "hooke-sl2", "--c", "2"], &dir.path().join("h.svg"));
    assert_eq!(hooke.matches("<polyline").count(), 1);
    let horo = svg_of(&["homog", "--model", "horocycle", "--c", "2"], &dir.path().join("q.svg"));
    assert!(horo.matches("<polyline").count() >= 1);
    let heis = svg_of(&["homog", "--model", "flat-heisenberg"], &dir.path().join("f.svg"));
    assert!(heis.matches("<line").count() >= 10, "lines through the common point");
}

#[test]
fn homog_reports() {
    let out = chaincraft(&["homog", "--model", "hooke-sl2", "--c", "2", "--compare", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert!(doc.report["max_closed_form_dist"].unwrap() < 1e-7);
    assert!(doc.report["reconstruction_error"].unwrap() < 1e-8);

    let out = chaincraft(&["homog", "--model", "horocycle", "--c", "2", "--format", "json"]);
    assert_eq!(code(&out), 0);
    assert!(json(&out).report["max_resid"].unwrap() < 1e-9);

    let out = chaincraft(&["homog", "--model", "circles-se2", "--c", "2", "--compare", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert!((doc.report["amplitude"].unwrap() - doc.report["theta_max"].unwrap()).abs() < 1e-6);
    assert!(doc.report["max_newton_dist"].unwrap() < 1e-6);

    let out = chaincraft(&["homog", "--model", "flat-se2", "--c", "1.5", "--r", "0.8", "--format", "json"]);
    assert_eq!(code(&out), 0);
    assert!(json(&out).report["max_closed_form_dist"].unwrap() < 1e-10);

    let out = chaincraft(&["homog", "--model", "circles-se2", "--c", "5"]);
    assert_eq!(code(&out), 64);
}

#[test]
fn verify_subset_and_strict_scale() {
    let out = chaincraft(&["verify", "--only", "horocycle", "--threads", "1"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("horocycle") && !text.contains("forward"));
    assert!(text.contains("1/1 checks passed"));

    let out = chaincraft(&["verify", "--only", "converse", "--tol-scale", "1e-3"]);
    assert_eq!(code(&out), 1);
    assert_eq!(code(&chaincraft(&["verify", "--only", "nope"])), 64);
}
