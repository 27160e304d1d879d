//! Preparation-error handling by post-selection on fiducial measurements.

use crate::error::{check_probability, Error, Result};
use crate::sim::record::RecordSet;

/// Keeps shots whose first `k` post-selection bits are 0 on every qubit.
/// Returns the kept shots (with the post-selection bits dropped) and the
/// kept fraction.
pub fn post_select(records: &RecordSet, k: usize) -> Result<(RecordSet, f64)> {
    if k > records.postselect {
        return Err(Error::PostSelectTooLong {
            requested: k,
            available: records.postselect,
        });
    }
    if records.is_empty() {
        return Err(Error::Empty("post-selection over zero shots"));
    }
    let mut kept = RecordSet::new(records.n_qubits, records.slots, 0);
    kept.records = records
        .records
        .iter()
        .filter(|r| r.postselect.iter().all(|s| (0..k).all(|i| !s.get(i))))
        .map(|r| {
            let mut r = r.clone();
            r.postselect = vec![crate::bits::BitString::zeros(0); records.n_qubits];
            r
        })
        .collect();
    let rate = kept.len() as f64 / records.len() as f64;
    Ok((kept, rate))
}

/// Posterior probability that the initial state was wrong after reading `k`
/// zeros: `e10^k x / ((1−x)(1−e01)^k + x e10^k)`.
pub fn residual_prep_error(x: f64, eps_10: f64, eps_01: f64, k: u32) -> Result<f64> {
    check_probability("x", x)?;
    check_probability("eps_10", eps_10)?;
    check_probability("eps_01", eps_01)?;
    let wrong = x * eps_10.powi(k as i32);
    let denom = (1.0 - x) * (1.0 - eps_01).powi(k as i32) + wrong;
    if denom == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(wrong / denom)
}
