//! Loading a shipped preset, changing it, and evaluating its metrics against
//! the expected-results file, as `parmit report` does.

use std::path::Path;

use parity_mitigation::cli::{evaluate, preset, report_metrics, Expectations};
use parity_mitigation::config::ExperimentConfig;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (text, expected) = preset("table1").ok_or("table1 preset missing")?;
    let mut cfg = ExperimentConfig::from_toml(text)?;
    // A smaller run: Monte Carlo checks widen with the stderr.
    cfg.run.n_shots = 50_000;
    println!("config hash {}", cfg.hash());
    let metrics = report_metrics(&cfg, Path::new("."))?;
    let expected: Expectations = serde_json::from_str(expected)?;
    let (lines, ok) = evaluate(&metrics, &expected);
    for l in &lines {
        println!("{l}");
    }
    assert!(ok);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
