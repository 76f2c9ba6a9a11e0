//! One line per acceptance criterion; exits nonzero if any fails.
//!
//! `WMNC_SEED` overrides the default seed.

use std::process::ExitCode;

use wmnc::acceptance::{run_all, SuiteOptions};

fn main() -> ExitCode {
    let mut options = SuiteOptions::default();
    if let Ok(s) = std::env::var("WMNC_SEED") {
        options.seed = s.parse().expect("WMNC_SEED must be an integer");
    }
    println!("acceptance suite, seed {}", options.seed);
    let results = run_all(&options);
    for r in &results {
        println!("{}", r.line());
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
