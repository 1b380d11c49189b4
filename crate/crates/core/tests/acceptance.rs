//! Every acceptance criterion at its pinned tolerance, one line each.
//!
//! A single test so that the timed criteria do not compete for cores
//! with other tests of this target.

use jacobi_spectral::suite::{run_suite, SuiteConfig, SuiteReport};

fn print_failures(report: &SuiteReport) {
    for c in report.criteria.iter().filter(|c| !c.pass) {
        for r in &c.reports {
            for k in r.checks.iter().filter(|k| !k.pass) {
                println!("    {} / {}: {:e} vs {:e}", r.experiment, k.name, k.value, k.threshold);
            }
        }
    }
}

#[test]
fn acceptance_criteria() {
    println!("== smoke suite");
    let smoke = run_suite(&SuiteConfig::smoke(), |c| println!("{}", c.summary_line())).expect("smoke suite runs");
    print_failures(&smoke);
    let smoke_line = format!(
        "smoke total {} {} ms (budget {} ms)",
        if smoke.pass { "PASS" } else { "FAIL" },
        smoke.runtime_ms,
        smoke.config.budget_ms
    );
    println!("{smoke_line}");

    println!("== full suite");
    let full = run_suite(&SuiteConfig::full(), |c| println!("{}", c.summary_line())).expect("full suite runs");
    print_failures(&full);
    println!(
        "full total {} {} ms (budget {} ms)",
        if full.pass { "PASS" } else { "FAIL" },
        full.runtime_ms,
        full.config.budget_ms
    );

    assert_eq!(full.criteria.len(), 13);
    let failed: Vec<u32> = full.criteria.iter().filter(|c| !c.pass).map(|c| c.id).collect();
    assert!(smoke.pass, "{smoke_line}");
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
