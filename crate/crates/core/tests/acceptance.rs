//! One PASS/FAIL line per acceptance criterion; exits nonzero on any failure.
//! `QUASILIN_SEED` overrides the default seed.

use std::process::ExitCode;
use std::time::Instant;

use quasilin::acceptance::{run_criterion, CRITERIA, DEFAULT_SEED};

fn main() -> ExitCode {
    let seed = std::env::var("QUASILIN_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SEED);
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    println!("acceptance suite, seed {seed}");
    let mut failed = 0;
    for (id, _) in CRITERIA {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let o = run_criterion(id, seed);
        println!("{o} [{:.1}s]", t.elapsed().as_secs_f64());
        failed += usize::from(!o.passed);
    }
    println!("{failed} failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
