//! One line per acceptance criterion, run at the default parameters.
//!
//! Criterion 11 asks for a decay rate of 1.0 at η = 1; the rate is η²/2, so
//! its `delta_at_eta_1` check is expected to fail and is reported as FAIL.
//! Any other failing check fails this target.

use std::process::ExitCode;
use std::time::Instant;

use microlocal_cli::{run_experiment, Envelope, ExperimentConfig, RunOptions, REGISTRY};
use rayon::prelude::*;

/// (criterion, check) pairs known to fail at the specified target.
const EXPECTED_FAILURES: &[(u8, &str)] = &[(11, "delta_at_eta_1")];

fn main() -> ExitCode {
    let start = Instant::now();
    let results: Vec<Result<Envelope, String>> = REGISTRY
        .par_iter()
        .map(|spec| {
            run_experiment(&ExperimentConfig::new(spec.id), None, &RunOptions::default())
                .map(|o| o.envelope)
                .map_err(|e| format!("{}: {e}", spec.id))
        })
        .collect();

    let mut unexpected = Vec::new();
    let mut covered = Vec::new();
    for r in results {
        let env = match r {
            Ok(env) => env,
            Err(e) => {
                println!("ERROR {e}");
                unexpected.push(e);
                continue;
            }
        };
        covered.push(env.criterion);
        let failed: Vec<_> = env.failures();
        let summary = if failed.is_empty() {
            env.checks
                .iter()
                .map(|c| c.detail.as_str())
                .collect::<Vec<_>>()
                .join("; ")
        } else {
            failed
                .iter()
                .map(|c| format!("{}: {}", c.name, c.detail))
                .collect::<Vec<_>>()
                .join("; ")
        };
        println!(
            "criterion {:>2} {:<20} {}  {}",
            env.criterion,
            env.experiment,
            if env.pass { "PASS" } else { "FAIL" },
            summary
        );
        for c in failed {
            if !EXPECTED_FAILURES.contains(&(env.criterion, c.name.as_str())) {
                unexpected.push(format!("criterion {} check {}", env.criterion, c.name));
            }
        }
        for &(k, name) in EXPECTED_FAILURES {
            if k == env.criterion && !env.checks.iter().any(|c| c.name == name) {
                unexpected.push(format!("criterion {k} lost its `{name}` check"));
            }
        }
    }
    covered.sort_unstable();
    if covered != (1..=16).collect::<Vec<u8>>() {
        unexpected.push(format!("criteria covered: {covered:?}"));
    }
    println!("acceptance finished in {:.1?}", start.elapsed());
    if unexpected.is_empty() {
        println!("acceptance: all results as expected");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected results: {unexpected:?}");
        ExitCode::FAILURE
    }
}
