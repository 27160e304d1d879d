//! Approximate inversion applied to parity tallies.
//!
//! A mask-form inverse `β` applied to each of `2j+1` readouts before taking
//! the parity gives the same result as applying `β` convolved `2j+1` times to
//! the parity tally, because XOR commutes. Only the tally is needed, so the
//! correction is pure post-processing.

use std::collections::BTreeMap;

use crate::bits::BitString;
use crate::channel::{twirl, LocalChannel, TwirledChannel};
use crate::error::{Error, Result};
use crate::matrix::AssignmentMatrix;
use crate::mitigation::amplify::{AmplifiedDistribution, Moments};

/// Quasi-probability inverse of the twirled form of `m`.
pub fn twirl_inverse(m: &AssignmentMatrix) -> Result<TwirledChannel> {
    twirl(m).inverse()
}

/// Applies `inverse^(2j+1)` to a level-`j` tally. The result is signed; it is
/// neither clipped nor renormalized.
pub fn hybrid_inverse(
    amplified: &AmplifiedDistribution,
    inverse: &TwirledChannel,
    j: usize,
) -> Result<AmplifiedDistribution> {
    if inverse.n_qubits() != amplified.n_qubits {
        return Err(Error::DimensionMismatch {
            expected: amplified.n_qubits,
            actual: inverse.n_qubits(),
        });
    }
    let beta = inverse.power(2 * j + 1);
    let mut outcomes: BTreeMap<BitString, Moments> = BTreeMap::new();
    for (s, m) in &amplified.outcomes {
        for (f, w) in beta.terms() {
            let e = outcomes.entry(s ^ f).or_default();
            e.sum += w * m.sum;
            e.sumsq += w * w * m.sumsq;
        }
    }
    Ok(AmplifiedDistribution {
        outcomes,
        ..amplified.clone()
    })
}

/// Same correction for a product inverse on many qubits, evaluated only at
/// `targets`.
pub fn hybrid_inverse_local(
    amplified: &AmplifiedDistribution,
    inverse: &LocalChannel,
    j: usize,
    targets: &[BitString],
) -> Result<AmplifiedDistribution> {
    if inverse.n_qubits() != amplified.n_qubits {
        return Err(Error::DimensionMismatch {
            expected: amplified.n_qubits,
            actual: inverse.n_qubits(),
        });
    }
    let beta = inverse.power(2 * j + 1);
    let outcomes = targets
        .iter()
        .map(|o| {
            let mut acc = Moments::default();
            for (s, m) in &amplified.outcomes {
                let w = beta.weight(&(o ^ s));
                acc.sum += w * m.sum;
                acc.sumsq += w * w * m.sumsq;
            }
            (o.clone(), acc)
        })
        .collect();
    Ok(AmplifiedDistribution {
        outcomes,
        ..amplified.clone()
    })
}
