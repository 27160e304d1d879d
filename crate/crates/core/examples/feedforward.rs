//! An observable selected by a mid-circuit parity: plain and weighted shot
//! averages, then mitigation of the expectation value.

use parity_mitigation::mitigation::{feedforward_expectation, mitigate_scalar};
use parity_mitigation::sim::{run_shots, Feedforward, Layout, Scheme, SequencePlan, SimConfig};
use parity_mitigation::{QubitNoise, ReadoutModel};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (a0, a1) = (-1.0, 1.0);
    let mut config = SimConfig::new(
        ReadoutModel::symmetric(&[0.05]),
        QubitNoise::uniform(1, 0.01, 0.0)?,
        "1".parse()?,
    );
    config.feedforward = Some(Feedforward { qubit: 0, a0, a1 });
    for scheme in [Scheme::Basic, Scheme::Weighted] {
        let plan = SequencePlan::new(scheme, 2);
        let records = run_shots(config.clone(), plan, Layout::Shared, 100_000, 6)?;
        let weighted = scheme == Scheme::Weighted;
        let levels = (0..=2)
            .map(|j| feedforward_expectation(&records, &plan, 0, a0, a1, j, weighted))
            .collect::<Result<Vec<_>, _>>()?;
        for l in &levels {
            println!("{scheme} j={}: <A> = {:.5} ± {:.5}", l.j, l.value, l.stderr);
        }
        let est = mitigate_scalar(scheme.as_str(), &levels, 2)?;
        println!(
            "{scheme} mitigated: {:.5}",
            est.value.scalar().unwrap_or(f64::NAN)
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
