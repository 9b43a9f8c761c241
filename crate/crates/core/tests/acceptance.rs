//! One pass/fail line per acceptance criterion, at the default tolerances.
//!
//! Runs without the libtest harness so the lines are never captured.

use std::process::ExitCode;

use chaincraft::verify::{self, VerifyOptions};

fn main() -> ExitCode {
    let reports = verify::run(&VerifyOptions::default()).expect("suite runs");
    assert_eq!(reports.len(), verify::check_keys().len());
    for r in &reports {
        println!("criterion {:>2} [{}] {}: {}", r.id, r.key, r.title, if r.passed() { "PASS" } else { "FAIL" });
        for m in r.failures() {
            println!("    failed: {} = {:e} ({:?})", m.label, m.value, m.bound);
        }
        if let Some(e) = &r.error {
            println!("    error: {e}");
        }
    }
    let passed = reports.iter().filter(|r| r.passed()).count();
    println!("acceptance: {passed}/{} criteria passed", reports.len());

    // The suite must be able to fail: a thousandfold stricter lower bound rejects the converse check.
    let strict = VerifyOptions { tol_scale: 1e-3, only: vec!["converse".into()], threads: Some(1) };
    let strict_reports = verify::run(&strict).expect("suite runs");
    let discriminating = strict_reports.len() == 1 && !strict_reports[0].passed();
    println!("acceptance: stricter tolerances are rejected: {}", if discriminating { "PASS" } else { "FAIL" });

    if passed == reports.len() && discriminating {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
