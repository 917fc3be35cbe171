//! Acceptance gate: runs every criterion at its stated tolerance and prints one line each.
//!
//! Built with `harness = false` so the verdict lines always reach the output.

use std::process::ExitCode;

use nonlocalflow::verify::{run_criterion, CRITERIA};

fn main() -> ExitCode {
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .and_then(|v| v.parse().ok());
    let mut failed = 0;
    for c in CRITERIA.iter().filter(|c| only.is_none_or(|id| id == c.id)) {
        let report = run_criterion(c.id).expect("listed criterion");
        let verdict = if report.pass() { "PASS" } else { "FAIL" };
        println!(
            "{verdict} criterion {:>2} {:<32} worst margin {:>10.3e} ({:.1} s)",
            c.id,
            c.name,
            report.worst_margin(),
            report.seconds
        );
        for check in &report.checks {
            println!("    {check}");
        }
        if !report.pass() {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
