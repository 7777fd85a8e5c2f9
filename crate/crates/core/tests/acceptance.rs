//! Runs the ten acceptance criteria over the catalog and prints one line per
//! criterion. Also checks that a corrupted reference fixture is caught.

use std::process::ExitCode;

use morse_boundary::catalog;
use morse_boundary::tolerances::Tolerances;
use morse_boundary::verify::{run, run_entries};

fn main() -> ExitCode {
    let tol = Tolerances::default();
    let results = run(0, &tol);
    for r in &results {
        println!("criterion {:>2} {:<28} {}  {}", r.number, r.name, if r.passed { "PASS" } else { "FAIL" }, r.detail);
    }

    let mut entry = catalog::get("moebius").expect("catalog entry");
    entry.reference.absolute_twisted = entry.reference.absolute.clone();
    let corrupted = run_entries(vec![entry], 0, &tol);
    let caught = corrupted.iter().any(|r| r.number == 2 && !r.passed);
    println!("corrupted fixture detected          {}", if caught { "PASS" } else { "FAIL" });

    if results.len() == 10 && results.iter().all(|r| r.passed) && caught {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
