//! Expectation values of an observable chosen by a mid-circuit parity.

use crate::error::{Error, Result};
use crate::mitigation::estimate::ScalarLevel;
use crate::mitigation::parity::weight_bits;
use crate::sim::plan::SequencePlan;
use crate::sim::record::RecordSet;

/// Shot average of `A_par` for `qubit` over the level-`j` window, optionally
/// weighted by the window's decay weight.
pub fn feedforward_expectation(
    records: &RecordSet,
    plan: &SequencePlan,
    qubit: usize,
    a0: f64,
    a1: f64,
    j: usize,
    weighted: bool,
) -> Result<ScalarLevel> {
    if qubit >= records.n_qubits {
        return Err(Error::InvalidArgument(format!("qubit {qubit} out of range")));
    }
    if records.is_empty() {
        return Err(Error::Empty("feedforward over zero shots"));
    }
    let window = plan.window(j);
    if j > plan.j_max || window.end > records.slots {
        return Err(Error::LevelNotCovered {
            j,
            needed: window.end,
            available: records.slots,
        });
    }
    let len = window.len();
    let (mut sum, mut sumsq) = (0.0, 0.0);
    for r in &records.records {
        let seq = &r.qubits[qubit];
        let mut bits = 0u64;
        for (k, t) in window.clone().enumerate() {
            bits |= (seq.get(t) as u64) << k;
        }
        let a = if bits.count_ones() % 2 == 1 { a1 } else { a0 };
        let v = if weighted { a * weight_bits(bits, len) } else { a };
        sum += v;
        sumsq += v * v;
    }
    let n = records.len() as f64;
    let mean = sum / n;
    Ok(ScalarLevel {
        j,
        value: mean,
        stderr: ((sumsq / n - mean * mean).max(0.0) / n).sqrt(),
        n_shots: records.len(),
    })
}
