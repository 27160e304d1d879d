//! Repeated readouts of one qubit: simulated sequence frequencies against the
//! exact enumeration.

use std::collections::BTreeMap;

use parity_mitigation::analysis::Oracle;
use parity_mitigation::sim::{run_shots, Layout, Scheme, SequencePlan, SimConfig};
use parity_mitigation::{BitString, QubitNoise, ReadoutModel};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let one: BitString = "1".parse()?;
    let (eps, gamma) = (0.05, 0.01);
    let readout = ReadoutModel::symmetric(&[eps]);
    let noise = QubitNoise::uniform(1, gamma, 0.0)?;
    let config = SimConfig::new(readout.clone(), noise.clone(), one.clone());
    let n = 200_000u64;
    let records = run_shots(config, SequencePlan::new(Scheme::Basic, 1), Layout::Shared, n, 7)?;

    let mut freq: BTreeMap<String, u64> = BTreeMap::new();
    for r in &records.records {
        *freq.entry(r.qubits[0].to_string()).or_default() += 1;
    }
    let exact = Oracle::new(readout, noise, &one)?.enumerate::<f64>(3)?;
    println!("seq   simulated  exact");
    for (seq, count) in &freq {
        let p = exact.prob_of(&[seq.as_str()])?;
        let f = *count as f64 / n as f64;
        println!("{seq}   {f:.5}    {p:.5}");
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        assert!((f - p).abs() < 5.0 * sd + 1e-9);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
