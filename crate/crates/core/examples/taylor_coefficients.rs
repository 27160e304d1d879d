//! Taylor coefficients and the mitigated assignment matrix.
//!
//! Run with `cargo run --example taylor_coefficients`.

use parity_mitigation::{mitigated_matrix, symmetric_assignment, TaylorCoefficients};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for m in 0..=3 {
        let a = TaylorCoefficients::new(m)?;
        let text: Vec<String> = a.coefficients().iter().map(|c| c.to_string()).collect();
        println!("m={m}: [{}]", text.join(", "));
    }
    // The residual of the mitigated matrix shrinks as eps^(m+1).
    let eps = 0.1;
    let m = symmetric_assignment(eps)?;
    for order in 0..=3 {
        let mit = mitigated_matrix(&m, order)?;
        println!("order {order}: off-diagonal {:.3e}", mit[(1, 0)]);
    }
    let m1 = mitigated_matrix(&m, 1)?;
    assert!((m1[(1, 1)] - 0.972).abs() < 1e-12);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
