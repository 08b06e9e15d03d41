//! Runs every acceptance criterion and prints one line per criterion.
//! Checks listed in `KNOWN_SHORTFALLS` are printed as FAIL but do not fail the target.

use std::process::ExitCode;

use stokes_string::acceptance::{is_known_shortfall, run_all, tol};

fn main() -> ExitCode {
    println!("acceptance: n = {}, dt = {:e}, epsilon = {}", tol::N, tol::DT, tol::EPSILON);
    let results = run_all(|r| {
        println!("{}", r.line());
        for c in r.checks.iter().filter(|c| !c.passed) {
            let tag = if is_known_shortfall(r.id, &c.name) { "known shortfall" } else { "unexpected" };
            println!("    [{tag}] {}: {}", c.name, c.detail);
        }
    });
    let passed = results.iter().filter(|r| r.passed()).count();
    println!("{passed} of {} criteria passed", results.len());
    let unexpected = results
        .iter()
        .flat_map(|r| r.checks.iter().map(move |c| (r.id, c)))
        .filter(|(id, c)| !c.passed && !is_known_shortfall(*id, &c.name))
        .count();
    if results.len() == 12 && unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} unexpected failing checks");
        ExitCode::FAILURE
    }
}
