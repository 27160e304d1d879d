//! Measure-and-reset rounds amplify an arbitrary, untwirled readout matrix:
//! round 2j+1 is distributed as M^(2j+1) q.

use parity_mitigation::matrix::basis_vector;
use parity_mitigation::sim::run_reset_scheme;
use parity_mitigation::{apply_power, AssignmentMatrix, BitString, QubitNoise, TaylorCoefficients};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let m = AssignmentMatrix::from_rows(&[vec![0.98, 0.10], vec![0.02, 0.90]])?;
    let q: BitString = "1".parse()?;
    let n = 200_000;
    let records = run_reset_scheme(&m, QubitNoise::none(1), q.clone(), 2, n, 3)?;
    let a = TaylorCoefficients::new(2)?.as_f64();
    let (mut exact_mit, mut sim_mit) = (0.0, 0.0);
    for (j, aj) in a.iter().enumerate() {
        let exact = apply_power(&m, 2 * j + 1, &basis_vector(&q))?[1];
        let ones = records.records.iter().filter(|r| r.qubits[0].get(2 * j)).count();
        let f = ones as f64 / n as f64;
        println!("rounds {}: exact {exact:.5}  simulated {f:.5}", 2 * j + 1);
        exact_mit += aj * exact;
        sim_mit += aj * f;
    }
    println!("mitigated: exact {exact_mit:.5}  simulated {sim_mit:.5}");
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
