//! Parity amplification under readout decay: the plain scheme keeps a
//! residual of about -gamma/2, dummy slots and weighted parity remove it.

use parity_mitigation::analysis::Oracle;
use parity_mitigation::mitigation::{
    amplified_distribution, mitigate, mitigate_shared, AmplifiedDistribution,
};
use parity_mitigation::sim::{Layout, Scheme, SequencePlan, SimConfig, Simulator};
use parity_mitigation::{BitString, QubitNoise, ReadoutModel};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let one: BitString = "1".parse()?;
    let (eps, gamma, m) = (0.02, 0.02, 2);
    let readout = ReadoutModel::symmetric(&[eps]);
    let noise = QubitNoise::uniform(1, gamma, 0.0)?;
    println!("scheme           exact      simulated");
    for scheme in [
        Scheme::Basic,
        Scheme::Dummy,
        Scheme::Weighted,
        Scheme::DummyPosterior,
    ] {
        let exact = Oracle::new(readout.clone(), noise.clone(), &one)?.mitigated_distribution(scheme, m)?[1];
        let plan = SequencePlan::new(scheme, m);
        let sim = Simulator::new(SimConfig::new(readout.clone(), noise.clone(), one.clone()), plan)?;
        let est = if scheme.supports_shared() {
            let records = sim.run(Layout::Shared, 100_000, 11)?;
            mitigate_shared(&records, &plan, m, 100, 11)?
        } else {
            // Posterior dummies need one circuit per level.
            let tallies: Vec<AmplifiedDistribution> = (0..=m)
                .map(|j| {
                    amplified_distribution(&sim.run(Layout::Level(j), 100_000, 11 + j as u64)?, &plan, j)
                })
                .collect::<Result<_, _>>()?;
            mitigate(&tallies, m)?
        };
        println!(
            "{:<16} {exact:.5}    {:.5} ± {:.5}",
            scheme.as_str(),
            est.value.at(&one),
            est.stderr.at(&one)
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
