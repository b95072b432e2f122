//! Runs every experiment at its default configuration and prints one line per criterion.

use std::process::ExitCode;
use std::time::Instant;

use chaoslab::cli::config::ExperimentConfig;
use chaoslab::cli::experiments::EXPERIMENTS;
use chaoslab::cli::run_experiment;

fn main() -> ExitCode {
    let out_dir = std::env::temp_dir().join("chaoslab-acceptance");
    let mut failed = Vec::new();
    for exp in &EXPERIMENTS {
        let cfg = ExperimentConfig { output: out_dir.join(exp.name), ..(exp.defaults)() };
        let t0 = Instant::now();
        let line = match run_experiment(exp, &cfg) {
            Ok((summary, _)) => {
                let bad: Vec<String> =
                    summary.checks.iter().filter(|c| !c.passed).map(|c| format!("{} ({})", c.name, c.detail)).collect();
                if bad.is_empty() {
                    format!("PASS  {} checks", summary.checks.len())
                } else {
                    failed.push(exp.criterion);
                    format!("FAIL  {}", bad.join("; "))
                }
            }
            Err(e) => {
                failed.push(exp.criterion);
                format!("FAIL  error: {e}")
            }
        };
        println!(
            "criterion {} ({} → {}): {line}  [{:.1} s]",
            exp.criterion,
            exp.name,
            exp.anchor,
            t0.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", EXPERIMENTS.len() - failed.len(), EXPERIMENTS.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
