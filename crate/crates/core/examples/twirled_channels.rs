//! Twirling an asymmetric readout into a flip-mask distribution, composing
//! channels and building the quasi-probability inverse.

use parity_mitigation::matrix::asymmetric_assignment;
use parity_mitigation::{twirl, AssignmentMatrix};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // P(1|0) = 0, P(0|1) = 0.2.
    let m = AssignmentMatrix::from_rows(&[vec![1.0, 0.2], vec![0.0, 0.8]])?;
    let c = twirl(&m);
    for (mask, w) in c.terms() {
        println!("mask {mask}: {w}");
    }
    assert!((c.weight(&"1".parse()?) - 0.1).abs() < 1e-12);

    // Two qubits with different local readouts, twirled jointly.
    let two = AssignmentMatrix::local_product(&[
        asymmetric_assignment(0.02, 0.06)?,
        asymmetric_assignment(0.01, 0.03)?,
    ])?;
    let t = twirl(&two);
    let cubed = t.power(3);
    println!(
        "three readouts in a row flip nothing with p = {:.6}",
        cubed.weight(&"00".parse()?)
    );

    // The inverse is a signed mask distribution; composing gives identity.
    let inv = t.inverse()?;
    assert!(inv.is_quasi());
    let id = t.compose(&inv)?;
    println!("one-norm of the inverse: {:.6}", inv.one_norm());
    assert!((id.weight(&"00".parse()?) - 1.0).abs() < 1e-12);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
