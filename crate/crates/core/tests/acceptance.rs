//! Runs every acceptance criterion at its stated size and prints one
//! PASS/FAIL line per criterion. Criteria listed in `KNOWN_GAPS` are run and
//! reported like the rest but do not fail the target.
//!
//! Built without the libtest harness so the lines are never captured.

use std::process::ExitCode;

use vgx_core::acceptance::{run_suite, Suite, SuiteOptions};

fn main() -> ExitCode {
    // Accept and ignore libtest flags such as `--nocapture`; a name filter
    // that cannot match this target skips it.
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !filters.is_empty() && !filters.iter().any(|f| "acceptance_criteria".contains(f.as_str())) {
        return ExitCode::SUCCESS;
    }
    println!("running acceptance criteria (full suite)");
    let results = run_suite(Suite::Full, &SuiteOptions::default(), |r| println!("{}", r.line()));
    for r in results.iter().filter(|r| !r.passed && r.known_gap.is_some()) {
        println!("criterion {} known gap: {}", r.id, r.known_gap.as_deref().unwrap_or(""));
    }
    let unexpected: Vec<String> =
        results.iter().filter(|r| !r.passed && r.known_gap.is_none()).map(|r| r.line()).collect();
    let passed = results.iter().filter(|r| r.passed).count();
    println!(
        "acceptance: {passed} passed, {} known gap, {} unexpected failure(s)",
        results.len() - passed - unexpected.len(),
        unexpected.len()
    );
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failed criteria:\n{}", unexpected.join("\n"));
        ExitCode::FAILURE
    }
}
