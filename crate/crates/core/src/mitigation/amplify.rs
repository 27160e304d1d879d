//! Per-level tallies of a record set.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::mitigation::parity::{majority_bits, weight_bits};
use crate::mitigation::Tally;
use crate::sim::plan::{Scheme, SequencePlan};
use crate::sim::record::{RecordSet, ShotRecord};

/// First and second moments of the per-shot contribution to one outcome.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub sum: f64,
    pub sumsq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplifiedDistribution {
    pub j: usize,
    pub scheme: Scheme,
    pub n_qubits: usize,
    pub n_shots: usize,
    /// Sparse: outcomes never observed are absent.
    pub outcomes: BTreeMap<BitString, Moments>,
}

/// Shots per parallel chunk. Chunks are merged in index order, so the result
/// does not depend on the thread count.
const CHUNK: usize = 1 << 14;

/// Outcome and weight of one shot at a window.
pub(crate) fn reduce_shot(r: &ShotRecord, kind: Tally, window: &std::ops::Range<usize>) -> (BitString, f64) {
    let len = window.len();
    let mut w = 1.0;
    let outcome = BitString::from_bits(r.qubits.iter().map(|seq| {
        let bits = pack_window(seq, window);
        match kind {
            Tally::Parity => bits.count_ones() % 2 == 1,
            Tally::Weighted => {
                w *= weight_bits(bits, len);
                bits.count_ones() % 2 == 1
            }
            Tally::Majority => majority_bits(bits, len),
        }
    }));
    (outcome, w)
}

fn pack_window(seq: &BitString, window: &std::ops::Range<usize>) -> u64 {
    let mut bits = 0u64;
    for (k, t) in window.clone().enumerate() {
        bits |= (seq.get(t) as u64) << k;
    }
    bits
}

impl AmplifiedDistribution {
    pub fn from_shots<I>(j: usize, scheme: Scheme, n_qubits: usize, shots: I) -> Self
    where
        I: IntoIterator<Item = (BitString, f64)>,
    {
        let mut outcomes: BTreeMap<BitString, Moments> = BTreeMap::new();
        let mut n_shots = 0;
        for (o, w) in shots {
            n_shots += 1;
            if w != 0.0 {
                let m = outcomes.entry(o).or_default();
                m.sum += w;
                m.sumsq += w * w;
            }
        }
        Self {
            j,
            scheme,
            n_qubits,
            n_shots,
            outcomes,
        }
    }

    fn merge(&mut self, other: Self) {
        self.n_shots += other.n_shots;
        for (o, m) in other.outcomes {
            let e = self.outcomes.entry(o).or_default();
            e.sum += m.sum;
            e.sumsq += m.sumsq;
        }
    }

    /// Weighted frequency of `outcome`.
    pub fn prob(&self, outcome: &BitString) -> f64 {
        self.outcomes
            .get(outcome)
            .map_or(0.0, |m| m.sum / self.n_shots as f64)
    }

    /// Variance of `prob(outcome)` from the per-shot moments.
    pub fn variance(&self, outcome: &BitString) -> f64 {
        let n = self.n_shots as f64;
        self.outcomes.get(outcome).map_or(0.0, |m| {
            let mean = m.sum / n;
            ((m.sumsq / n - mean * mean) / n).max(0.0)
        })
    }

    pub fn probabilities(&self) -> BTreeMap<BitString, f64> {
        self.outcomes.keys().map(|o| (o.clone(), self.prob(o))).collect()
    }

    /// Sum of all weighted frequencies; 1 for unweighted tallies.
    pub fn mass(&self) -> f64 {
        self.outcomes.values().map(|m| m.sum).sum::<f64>() / self.n_shots as f64
    }

    /// Dense vector over all `2^n` outcomes.
    pub fn to_dense(&self) -> Result<Vec<f64>> {
        if self.n_qubits > crate::matrix::MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits(self.n_qubits));
        }
        let mut v = vec![0.0; 1 << self.n_qubits];
        for o in self.outcomes.keys() {
            v[o.to_index() as usize] = self.prob(o);
        }
        Ok(v)
    }
}

fn check_window(records: &RecordSet, plan: &SequencePlan, j: usize) -> Result<std::ops::Range<usize>> {
    if j > plan.j_max {
        return Err(Error::LevelNotCovered {
            j,
            needed: plan.scheme.slots(j),
            available: records.slots,
        });
    }
    let window = plan.window(j);
    if window.end > records.slots {
        return Err(Error::LevelNotCovered {
            j,
            needed: window.end,
            available: records.slots,
        });
    }
    Ok(window)
}

pub(crate) fn tally_window(
    records: &[ShotRecord],
    n_qubits: usize,
    j: usize,
    scheme: Scheme,
    kind: Tally,
    window: std::ops::Range<usize>,
) -> AmplifiedDistribution {
    let parts: Vec<AmplifiedDistribution> = records
        .par_chunks(CHUNK)
        .map(|chunk| {
            AmplifiedDistribution::from_shots(
                j,
                scheme,
                n_qubits,
                chunk.iter().map(|r| reduce_shot(r, kind, &window)),
            )
        })
        .collect();
    let mut acc = AmplifiedDistribution::from_shots(j, scheme, n_qubits, std::iter::empty());
    for p in parts {
        acc.merge(p);
    }
    acc
}

/// Tally of level `j`: parity (basic, dummy, reset), weighted parity, or
/// majority, over the scheme's window.
pub fn amplified_distribution(
    records: &RecordSet,
    plan: &SequencePlan,
    j: usize,
) -> Result<AmplifiedDistribution> {
    let window = check_window(records, plan, j)?;
    if window.len() % 2 == 0 {
        return Err(Error::EvenWindow(window.len()));
    }
    Ok(tally_window(
        &records.records,
        records.n_qubits,
        j,
        plan.scheme,
        Tally::for_scheme(plan.scheme),
        window,
    ))
}

/// Majority over the first `2m+1` slots.
pub fn majority_vote(records: &RecordSet, m: usize) -> Result<AmplifiedDistribution> {
    let plan = SequencePlan::new(Scheme::Majority, m);
    amplified_distribution(records, &plan, m)
}
