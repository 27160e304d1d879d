//! Readout error ramping during the run: interleaving the amplification
//! levels keeps the estimate on the drift-free reference, running them in
//! blocks does not.

use parity_mitigation::analysis::drift_experiment;
use parity_mitigation::sim::{DriftSchedule, ExecutionOrder, NoiseOverride, Scheme, SimConfig};
use parity_mitigation::{QubitNoise, ReadoutModel};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let n = 200_000;
    let mut config = SimConfig::new(
        ReadoutModel::symmetric(&[0.05]),
        QubitNoise::none(1),
        "1".parse()?,
    );
    let eps = |e: f64| NoiseOverride {
        epsilon: Some(vec![e]),
        ..Default::default()
    };
    config.drift = DriftSchedule::linear_ramp(n, eps(0.05), eps(0.15));
    println!("order        estimate   stderr    drift bias");
    for order in [ExecutionOrder::Interleaved, ExecutionOrder::Blocked] {
        let r = drift_experiment(&config, Scheme::Basic, 1, n, order, 9)?;
        println!(
            "{:<12} {:.5}    {:.5}   {:+.5}",
            format!("{order:?}"),
            r.estimate,
            r.stderr,
            r.drift_bias.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
