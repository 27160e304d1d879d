//! Per-qubit decay curves from long readout trains, and flagging a qubit
//! that decays much faster than the rest.

use parity_mitigation::analysis::{decay_curves, fit_decay, flag_defective};
use parity_mitigation::sim::{run_shots, Layout, Scheme, SequencePlan, SimConfig};
use parity_mitigation::{BitString, QubitNoise, ReadoutModel};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let n_qubits = 8;
    let mut gamma = vec![0.01; n_qubits];
    gamma[5] = 0.1;
    let noise = QubitNoise::new(gamma, vec![0.0; n_qubits])?;
    let config = SimConfig::new(
        ReadoutModel::symmetric(&[0.05; 8]),
        noise,
        BitString::ones(n_qubits),
    );
    // Twelve-slot trains: a basic plan at j = 6 has 13 slots.
    let records = run_shots(
        config,
        SequencePlan::new(Scheme::Basic, 6),
        Layout::Shared,
        20_000,
        2,
    )?;
    let curves = decay_curves(&records, true)?;
    let fits = curves.iter().map(fit_decay).collect::<Result<Vec<_>, _>>()?;
    for f in &fits {
        println!(
            "qubit {}: slope {:.4} rate {:.4} residual {:.1e}",
            f.qubit, f.slope, f.rate, f.residual
        );
    }
    let flagged = flag_defective(&fits, 5.0);
    println!("flagged: {flagged:?}");
    assert_eq!(flagged, vec![5]);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
