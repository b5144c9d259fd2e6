//! Runs the numerical verification suite: the linear-algebra identities the
//! rate analysis rests on, each checked over thousands of random draws.
//!
//! Run: cargo run --release --example identity_checks

use netdof::verify::run_checks;

fn main() {
    let reports = run_checks(&[], 10_000, 2024);
    let mut all = true;
    for r in &reports {
        let status = if r.passed() { "pass" } else { "FAIL" };
        all &= r.passed();
        println!(
            "{status}  {:32} trials {:>6}  failures {:>3}  worst {:>10.3e}  tol {:e}",
            r.check_name, r.trials, r.failures, r.worst_violation, r.tolerance
        );
    }
    println!(
        "\nsuite: {}",
        if all {
            "all checks passed"
        } else {
            "FAILURES present"
        }
    );
}
