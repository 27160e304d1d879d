//! Per-shot reductions of a measurement window: parity, alignment class,
//! decay weight and majority.
//!
//! The `*_bits` variants work on a window packed into a `u64` with the first
//! slot in bit 0; the oracle uses them on its sequence indices.

use crate::bits::BitString;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alignment {
    NonAligned,
    /// A run of 1s followed by a run of 0s.
    Left,
    /// A run of 0s followed by a run of 1s.
    Right,
}

/// XOR of an odd number of multi-qubit outcomes.
pub fn parity(outcomes: &[BitString]) -> Result<BitString> {
    if outcomes.len().is_multiple_of(2) {
        return Err(Error::EvenWindow(outcomes.len()));
    }
    let mut acc = outcomes[0].clone();
    for o in &outcomes[1..] {
        acc = acc.try_xor(o)?;
    }
    Ok(acc)
}

pub(crate) fn classify_bits(bits: u64, len: usize) -> Alignment {
    debug_assert!((1..=64).contains(&len));
    let full = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
    let bits = bits & full;
    if bits == 0 || bits == full {
        return Alignment::NonAligned;
    }
    let ones = bits.count_ones();
    let low_run = (1u64 << ones) - 1;
    if bits == low_run {
        Alignment::Left
    } else if bits == full & !((1u64 << (len as u32 - ones)) - 1) {
        Alignment::Right
    } else {
        Alignment::NonAligned
    }
}

#[inline]
fn low(bits: u64, len: usize) -> u64 {
    if len >= 64 {
        bits
    } else {
        bits & ((1u64 << len) - 1)
    }
}

#[inline]
pub(crate) fn weight_bits(bits: u64, len: usize) -> f64 {
    let bits = low(bits, len);
    let par = (bits.count_ones() % 2) as f64;
    match classify_bits(bits, len) {
        Alignment::NonAligned => 1.0,
        Alignment::Right => 2.0 * par,
        Alignment::Left => 2.0 * (1.0 - par),
    }
}

#[inline]
pub(crate) fn majority_bits(bits: u64, len: usize) -> bool {
    2 * low(bits, len).count_ones() as usize > len
}

pub fn classify_alignment(seq: &BitString) -> Alignment {
    let len = seq.width();
    if len == 0 {
        return Alignment::NonAligned;
    }
    let first = seq.get(0);
    let switches = (1..len).filter(|&i| seq.get(i) != seq.get(i - 1)).count();
    match (switches, first) {
        (1, true) => Alignment::Left,
        (1, false) => Alignment::Right,
        _ => Alignment::NonAligned,
    }
}

/// Decay weight of a single-qubit window: 1 unless the window is aligned;
/// `2·par` if right-aligned, `2·(1−par)` if left-aligned.
pub fn weight(seq: &BitString) -> Result<f64> {
    if seq.width().is_multiple_of(2) {
        return Err(Error::EvenWindow(seq.width()));
    }
    let par = seq.parity() as u8 as f64;
    Ok(match classify_alignment(seq) {
        Alignment::NonAligned => 1.0,
        Alignment::Right => 2.0 * par,
        Alignment::Left => 2.0 * (1.0 - par),
    })
}

pub fn majority(seq: &BitString) -> Result<bool> {
    if seq.width().is_multiple_of(2) {
        return Err(Error::EvenWindow(seq.width()));
    }
    Ok(2 * seq.count_ones() > seq.width())
}
