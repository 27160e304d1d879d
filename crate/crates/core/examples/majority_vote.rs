//! Majority voting over 2m+1 readouts suppresses symmetric flips but
//! accumulates decay linearly in m.

use parity_mitigation::analysis::Oracle;
use parity_mitigation::mitigation::majority_vote;
use parity_mitigation::sim::{run_shots, Layout, Scheme, SequencePlan, SimConfig};
use parity_mitigation::{BitString, QubitNoise, ReadoutModel};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let one: BitString = "1".parse()?;
    let (eps, gamma) = (0.01, 0.03);
    let readout = ReadoutModel::symmetric(&[eps]);
    let noise = QubitNoise::uniform(1, gamma, 0.0)?;
    let oracle = Oracle::new(readout.clone(), noise.clone(), &one)?;
    let raw = oracle.level_distribution::<f64>(Scheme::Majority, 0)?[1];
    let config = SimConfig::new(readout, noise, one.clone());
    let records = run_shots(
        config,
        SequencePlan::new(Scheme::Majority, 3),
        Layout::Shared,
        100_000,
        5,
    )?;
    println!("raw single readout: {raw:.5}");
    for m in 0..=3 {
        let exact = oracle.level_distribution::<f64>(Scheme::Majority, m)?[1];
        let sim = majority_vote(&records, m)?.prob(&one);
        println!(
            "m={m}: exact {exact:.5}  simulated {sim:.5}  bias vs raw {:+.5}",
            exact - raw
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
