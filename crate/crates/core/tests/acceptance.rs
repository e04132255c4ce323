//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::process::ExitCode;

use psystem::acceptance::run_criterion;

fn main() -> ExitCode {
    let mut failed = Vec::new();
    let mut slow = Vec::new();
    for id in 1..=11 {
        let r = run_criterion(id);
        println!("{r}");
        if !r.passed {
            failed.push(id);
        }
        if !r.within_budget() {
            slow.push(id);
        }
    }
    println!("acceptance: {}/11 passed; over budget: {slow:?}", 11 - failed.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
