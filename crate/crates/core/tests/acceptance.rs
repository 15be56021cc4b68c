//! The twelve acceptance criteria, one PASS/FAIL line each. Tolerances are
//! pinned inside the suite. Runs without the libtest harness so the lines
//! always reach the terminal.

use std::process::ExitCode;

use shapesphere::cli::verify_suite;

const SEED: u64 = 0;

fn main() -> ExitCode {
    let (results, secs) = match verify_suite(SEED, None) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("acceptance suite did not run: {e}");
            return ExitCode::FAILURE;
        }
    };
    for r in &results {
        println!("{}", r.line());
        for n in &r.notes {
            println!("    {n}");
        }
    }
    println!("criterion 1 wall time {secs:.2} s");
    let failed: Vec<_> = results.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    if results.len() != 12 || !failed.is_empty() {
        eprintln!("{} criteria, failed: {failed:?}", results.len());
        return ExitCode::FAILURE;
    }
    println!("acceptance: 12/12 PASS");
    ExitCode::SUCCESS
}
