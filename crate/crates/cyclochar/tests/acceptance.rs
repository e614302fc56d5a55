//! Acceptance gate: runs all eleven verification criteria at full strength
//! and prints one pass/fail line each.

use cyclochar::suite;

#[test]
fn acceptance() {
    let reports = suite::run_all(false);
    let mut ok = true;
    for r in &reports {
        println!(
            "[{}] criterion {:2} {:<45} residual {:9.2e} (tol {:7.1e}, {:6.2}s) {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.id,
            r.name,
            r.residual,
            r.tolerance,
            r.seconds,
            r.detail
        );
        ok &= r.passed;
    }
    assert!(ok, "one or more acceptance criteria failed");
}
