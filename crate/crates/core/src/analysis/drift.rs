//! Mitigation under drifting noise: interleaved against blocked level order.

use serde::{Deserialize, Serialize};

use crate::analysis::oracle::Oracle;
use crate::error::{Error, Result};
use crate::mitigation::{mitigate, AmplifiedDistribution};
use crate::sim::drift::NoiseState;
use crate::sim::engine::{SimConfig, Simulator};
use crate::sim::plan::{ExecutionOrder, Scheme, SequencePlan};
use crate::taylor::TaylorCoefficients;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub order: ExecutionOrder,
    pub scheme: Scheme,
    pub m: usize,
    pub n_shots: u64,
    /// Mitigated probability of the configured target.
    pub estimate: f64,
    pub stderr: f64,
    /// Estimate minus the ideal value 1.
    pub bias: f64,
    /// Time average of the exactly mitigated value over the schedule, if an
    /// oracle exists for the configuration.
    pub reference: Option<f64>,
    /// Estimate minus `reference`.
    pub drift_bias: Option<f64>,
    /// Expected estimate under this ordering, from the per-bin oracle.
    pub expected: Option<f64>,
    /// Per-level tallied probability of the target.
    pub per_level: Vec<f64>,
}

/// Number of time bins used for the oracle reference.
const BINS: u64 = 256;

/// Runs `n_shots` shots, assigning levels by `order`, and mitigates the
/// target probability to order `m`. Levels are tallied independently.
pub fn drift_experiment(
    config: &SimConfig,
    scheme: Scheme,
    m: usize,
    n_shots: u64,
    order: ExecutionOrder,
    seed: u64,
) -> Result<DriftReport> {
    if n_shots < m as u64 + 1 {
        return Err(Error::InvalidArgument(format!(
            "{n_shots} shots cannot cover {} levels",
            m + 1
        )));
    }
    let plan = SequencePlan::new(scheme, m);
    let sim = Simulator::new(config.clone(), plan)?;
    let sets = sim.run_levels(order, n_shots, seed)?;
    let tallies: Vec<AmplifiedDistribution> = sets
        .iter()
        .enumerate()
        .map(|(j, s)| crate::mitigation::amplified_distribution(s, &plan, j))
        .collect::<Result<_>>()?;
    let est = mitigate(&tallies, m)?;
    let target = &config.target;
    let estimate = est.value.at(target);
    let stderr = est.stderr.at(target);
    let per_level = tallies.iter().map(|d| d.prob(target)).collect();

    let (reference, expected) = match oracle_reference(config, scheme, m, n_shots, order) {
        Ok((r, e)) => (Some(r), Some(e)),
        Err(_) => (None, None),
    };
    Ok(DriftReport {
        order,
        scheme,
        m,
        n_shots,
        estimate,
        stderr,
        bias: estimate - 1.0,
        reference,
        drift_bias: reference.map(|r| estimate - r),
        expected,
        per_level,
    })
}

/// Drift-free reference and expected estimate, binning the schedule into
/// `BINS` equal time windows evaluated at their midpoints.
fn oracle_reference(
    config: &SimConfig,
    scheme: Scheme,
    m: usize,
    n_shots: u64,
    order: ExecutionOrder,
) -> Result<(f64, f64)> {
    let coeffs = TaylorCoefficients::new(m)?.as_f64();
    let base = NoiseState {
        readout: config.readout.clone(),
        noise: config.noise.clone(),
    };
    let target = config.target.to_index() as usize;
    let bins = BINS.min(n_shots);
    // level_values[b][j]: tallied target probability in bin b.
    let mut level_values = Vec::with_capacity(bins as usize);
    let mut counts = vec![vec![0u64; m + 1]; bins as usize];
    for b in 0..bins {
        let (lo, hi) = (b * n_shots / bins, (b + 1) * n_shots / bins);
        let state = config.drift.resolve((lo + hi - 1) / 2, &base);
        let oracle = Oracle::for_config(config, &state, scheme)?;
        let vals: Vec<f64> = (0..=m)
            .map(|j| Ok(oracle.level_distribution::<f64>(scheme, j)?[target]))
            .collect::<Result<_>>()?;
        level_values.push(vals);
        for i in lo..hi {
            counts[b as usize][order.level(i, n_shots, m)] += 1;
        }
    }
    let weight = |b: u64| ((b + 1) * n_shots / bins - b * n_shots / bins) as f64 / n_shots as f64;
    let reference = (0..bins)
        .map(|b| {
            let v = &level_values[b as usize];
            weight(b) * coeffs.iter().zip(v).map(|(a, p)| a * p).sum::<f64>()
        })
        .sum();
    let expected = (0..=m)
        .map(|j| {
            let total: u64 = counts.iter().map(|c| c[j]).sum();
            let mean = counts
                .iter()
                .zip(&level_values)
                .map(|(c, v)| c[j] as f64 * v[j])
                .sum::<f64>()
                / total.max(1) as f64;
            coeffs[j] * mean
        })
        .sum();
    Ok((reference, expected))
}
