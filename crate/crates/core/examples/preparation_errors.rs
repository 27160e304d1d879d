//! Preparation errors: post-selection on fiducial readouts, and a
//! parity-controlled reset that amplifies the preparation error like a
//! readout.

use parity_mitigation::mitigation::{post_select, residual_prep_error};
use parity_mitigation::sim::{run_prep_parity, run_shots, Layout, Scheme, SequencePlan, SimConfig};
use parity_mitigation::{BitString, PrepMode, PrepModel, QubitNoise, ReadoutModel};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (x, eps) = (0.05, 0.05);
    for k in 1..=3 {
        println!(
            "k={k}: P(wrong | {k} zeros) = {:.3e}",
            residual_prep_error(x, eps, eps, k)?
        );
    }

    let mut config = SimConfig::new(ReadoutModel::symmetric(&[eps]), QubitNoise::none(1), "1".parse()?);
    config.prep = PrepModel::new(vec![x], PrepMode::PostSelected { k: 3 })?;
    let n = 100_000;
    let records = run_shots(config, SequencePlan::new(Scheme::Basic, 0), Layout::Shared, n, 21)?;
    let (kept, rate) = post_select(&records, 3)?;
    let wrong = kept.records.iter().filter(|r| !r.prep.get(0)).count();
    println!(
        "post-selection keeps {rate:.4} (expected {:.4}); {wrong} of {} kept shots start wrong",
        (1.0 - x) * (1.0 - eps).powi(3) + x * eps.powi(3),
        kept.len()
    );

    // Reset driven by the parity of 2j+1 readouts of an incoming state.
    let zero = BitString::zeros(1);
    for j in 0..=2 {
        let r = run_prep_parity(0.1, 0.0, 0.3, j, n, 4)?;
        let bad = r.records.iter().filter(|s| s.prep != zero).count() as f64 / n as f64;
        println!(
            "parity reset over {} readouts: wrong after reset {bad:.4}",
            2 * j + 1
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
