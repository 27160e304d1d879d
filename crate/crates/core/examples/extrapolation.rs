//! Exponential extrapolation of a weighted-parity series to a higher order,
//! compared with the exact value at that order.

use parity_mitigation::analysis::{extrapolate, Oracle};
use parity_mitigation::mitigation::mitigate_shared;
use parity_mitigation::sim::{run_shots, Layout, Scheme, SequencePlan, SimConfig};
use parity_mitigation::{BitString, QubitNoise, ReadoutModel};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let one: BitString = "1".parse()?;
    let readout = ReadoutModel::symmetric(&[0.08]);
    let noise = QubitNoise::uniform(1, 0.01, 0.0)?;
    let plan = SequencePlan::new(Scheme::Weighted, 3);
    let config = SimConfig::new(readout.clone(), noise.clone(), one.clone());
    let records = run_shots(config, plan, Layout::Shared, 200_000, 17)?;
    let (mut ms, mut vs, mut sds) = (Vec::new(), Vec::new(), Vec::new());
    for m in 0..=3 {
        let e = mitigate_shared(&records, &plan, m, 100, 17)?;
        ms.push(m as f64);
        vs.push(e.value.at(&one));
        sds.push(e.stderr.at(&one));
        println!("m={m}: {:.5} ± {:.5}", vs[m], sds[m]);
    }
    let fit = extrapolate(&ms, &vs, Some(&sds), 5.0)?;
    let exact = Oracle::new(readout, noise, &one)?.mitigated_distribution(Scheme::Weighted, 5)?[1];
    println!(
        "extrapolated to m=5: {:.5} ± {:.5} (exact {exact:.5}, r = {:.3}, monotone {})",
        fit.value, fit.stderr, fit.r, fit.monotone
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
