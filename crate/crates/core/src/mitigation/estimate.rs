//! Taylor combination of amplification levels.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::mitigation::amplify::{reduce_shot, AmplifiedDistribution};
use crate::mitigation::Tally;
use crate::sim::plan::SequencePlan;
use crate::sim::record::RecordSet;
use crate::taylor::TaylorCoefficients;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Scalar(f64),
    Distribution(BTreeMap<BitString, f64>),
}

impl Quantity {
    /// Entry for `outcome` (0 if absent), or the scalar itself.
    pub fn at(&self, outcome: &BitString) -> f64 {
        match self {
            Quantity::Scalar(v) => *v,
            Quantity::Distribution(d) => d.get(outcome).copied().unwrap_or(0.0),
        }
    }

    pub fn scalar(&self) -> Option<f64> {
        match self {
            Quantity::Scalar(v) => Some(*v),
            Quantity::Distribution(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MitigationEstimate {
    pub scheme: String,
    pub m: usize,
    pub value: Quantity,
    pub stderr: Quantity,
    pub per_j_inputs: Vec<Quantity>,
    pub n_shots: usize,
    pub discarded_fraction: f64,
}

fn pick_levels(inputs: &[AmplifiedDistribution], m: usize) -> Result<Vec<&AmplifiedDistribution>> {
    let scheme = inputs.first().ok_or(Error::MissingLevel(0))?.scheme;
    if let Some(other) = inputs.iter().find(|d| d.scheme != scheme) {
        return Err(Error::SchemeMismatch(
            scheme.to_string(),
            other.scheme.to_string(),
        ));
    }
    (0..=m)
        .map(|j| inputs.iter().find(|d| d.j == j).ok_or(Error::MissingLevel(j)))
        .collect()
}

/// `Σ_j a_j p_j` over levels `0..=m` of independent tallies.
pub fn mitigate(inputs: &[AmplifiedDistribution], m: usize) -> Result<MitigationEstimate> {
    let levels = pick_levels(inputs, m)?;
    let coeffs = TaylorCoefficients::new(m)?;
    let keys: BTreeSet<&BitString> = levels.iter().flat_map(|d| d.outcomes.keys()).collect();
    let mut value = BTreeMap::new();
    let mut stderr = BTreeMap::new();
    for o in keys {
        let probs: Vec<f64> = levels.iter().map(|d| d.prob(o)).collect();
        let sds: Vec<f64> = levels.iter().map(|d| d.variance(o).sqrt()).collect();
        value.insert(o.clone(), coeffs.combine(&probs)?);
        stderr.insert(o.clone(), coeffs.combine_stderr(&sds)?);
    }
    Ok(MitigationEstimate {
        scheme: levels[0].scheme.to_string(),
        m,
        value: Quantity::Distribution(value),
        stderr: Quantity::Distribution(stderr),
        per_j_inputs: levels
            .iter()
            .map(|d| Quantity::Distribution(d.probabilities()))
            .collect(),
        n_shots: levels.iter().map(|d| d.n_shots).sum(),
        discarded_fraction: 0.0,
    })
}

/// One tally reported as it is, for estimators that are not combined across
/// levels (majority vote at order `m` is the level-`m` tally).
pub fn single_level(d: &AmplifiedDistribution) -> MitigationEstimate {
    let probs = d.probabilities();
    MitigationEstimate {
        scheme: d.scheme.to_string(),
        m: d.j,
        stderr: Quantity::Distribution(probs.keys().map(|o| (o.clone(), d.variance(o).sqrt())).collect()),
        per_j_inputs: vec![Quantity::Distribution(probs.clone())],
        value: Quantity::Distribution(probs),
        n_shots: d.n_shots,
        discarded_fraction: 0.0,
    }
}

/// Mitigation from one record set whose nested windows serve every level.
/// The levels are correlated, so the stderr comes from a shot bootstrap.
pub fn mitigate_shared(
    records: &RecordSet,
    plan: &SequencePlan,
    m: usize,
    resamples: usize,
    seed: u64,
) -> Result<MitigationEstimate> {
    let inputs: Vec<AmplifiedDistribution> = (0..=m)
        .map(|j| crate::mitigation::amplified_distribution(records, plan, j))
        .collect::<Result<_>>()?;
    let mut est = mitigate(&inputs, m)?;
    est.n_shots = records.len();
    let coeffs = TaylorCoefficients::new(m)?.as_f64();
    let Quantity::Distribution(value) = &est.value else {
        unreachable!()
    };
    let keys: Vec<BitString> = value.keys().cloned().collect();
    let index: BTreeMap<&BitString, usize> = keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
    // Per shot, the combined contribution to each key: Σ_j a_j w_j [o_j = key].
    let kind = Tally::for_scheme(plan.scheme);
    let contributions: Vec<Vec<(usize, f64)>> = records
        .records
        .par_iter()
        .map(|r| {
            let mut c: Vec<(usize, f64)> = Vec::with_capacity(m + 1);
            for (j, a) in coeffs.iter().enumerate() {
                let (o, w) = reduce_shot(r, kind, &plan.window(j));
                if w != 0.0 {
                    if let Some(&i) = index.get(&o) {
                        match c.iter_mut().find(|(k, _)| *k == i) {
                            Some(e) => e.1 += a * w,
                            None => c.push((i, a * w)),
                        }
                    }
                }
            }
            c
        })
        .collect();
    let sd = bootstrap_vector(&contributions, keys.len(), resamples, seed)?;
    est.stderr = Quantity::Distribution(keys.into_iter().zip(sd).collect());
    Ok(est)
}

/// Bootstrap standard deviation of per-key means of sparse per-shot
/// contributions.
pub(crate) fn bootstrap_vector(
    contributions: &[Vec<(usize, f64)>],
    n_keys: usize,
    resamples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let n = contributions.len();
    if n == 0 {
        return Err(Error::Empty("bootstrap over zero shots"));
    }
    if resamples < 2 {
        return Err(Error::InvalidArgument(
            "bootstrap needs at least two resamples".into(),
        ));
    }
    // Shots share few distinct contribution patterns; resample pattern ids
    // from a flat array and expand the counts afterwards.
    let mut ids: std::collections::HashMap<Vec<(usize, u64)>, u32> = std::collections::HashMap::new();
    let mut patterns: Vec<&[(usize, f64)]> = Vec::new();
    let shot_pattern: Vec<u32> = contributions
        .iter()
        .map(|c| {
            let key = c.iter().map(|&(k, v)| (k, v.to_bits())).collect();
            *ids.entry(key).or_insert_with(|| {
                patterns.push(c);
                (patterns.len() - 1) as u32
            })
        })
        .collect();
    let mut sum = vec![0.0; n_keys];
    let mut sumsq = vec![0.0; n_keys];
    const BATCH: usize = 16;
    let batches: Vec<usize> = (0..resamples).step_by(BATCH).collect();
    for start in batches {
        let means: Vec<Vec<f64>> = (start..(start + BATCH).min(resamples))
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(b as u64);
                let mut counts = vec![0u64; patterns.len()];
                for _ in 0..n {
                    counts[shot_pattern[rng.gen_range(0..n)] as usize] += 1;
                }
                let mut acc = vec![0.0; n_keys];
                for (p, &c) in patterns.iter().zip(&counts) {
                    for &(k, v) in p.iter() {
                        acc[k] += c as f64 * v;
                    }
                }
                acc.iter_mut().for_each(|a| *a /= n as f64);
                acc
            })
            .collect();
        for mean in means {
            for k in 0..n_keys {
                sum[k] += mean[k];
                sumsq[k] += mean[k] * mean[k];
            }
        }
    }
    let b = resamples as f64;
    Ok((0..n_keys)
        .map(|k| {
            let mu = sum[k] / b;
            ((sumsq[k] / b - mu * mu) * b / (b - 1.0)).max(0.0).sqrt()
        })
        .collect())
}

/// A scalar level estimate, e.g. a feedforward expectation value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarLevel {
    pub j: usize,
    pub value: f64,
    pub stderr: f64,
    pub n_shots: usize,
}

pub fn mitigate_scalar(scheme: &str, inputs: &[ScalarLevel], m: usize) -> Result<MitigationEstimate> {
    let levels: Vec<&ScalarLevel> = (0..=m)
        .map(|j| inputs.iter().find(|d| d.j == j).ok_or(Error::MissingLevel(j)))
        .collect::<Result<_>>()?;
    let coeffs = TaylorCoefficients::new(m)?;
    let values: Vec<f64> = levels.iter().map(|l| l.value).collect();
    let sds: Vec<f64> = levels.iter().map(|l| l.stderr).collect();
    Ok(MitigationEstimate {
        scheme: scheme.to_string(),
        m,
        value: Quantity::Scalar(coeffs.combine(&values)?),
        stderr: Quantity::Scalar(coeffs.combine_stderr(&sds)?),
        per_j_inputs: values.into_iter().map(Quantity::Scalar).collect(),
        n_shots: levels.iter().map(|l| l.n_shots).sum(),
        discarded_fraction: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::plan::Scheme;

    fn exact_level(j: usize, p1: f64, n: usize) -> AmplifiedDistribution {
        let mut outcomes = BTreeMap::new();
        let ones = p1 * n as f64;
        outcomes.insert(
            "1".parse().unwrap(),
            crate::mitigation::amplify::Moments {
                sum: ones,
                sumsq: ones,
            },
        );
        let zeros = n as f64 - ones;
        outcomes.insert(
            "0".parse().unwrap(),
            crate::mitigation::amplify::Moments {
                sum: zeros,
                sumsq: zeros,
            },
        );
        AmplifiedDistribution {
            j,
            scheme: Scheme::Basic,
            n_qubits: 1,
            n_shots: n,
            outcomes,
        }
    }

    #[test]
    fn first_and_second_order_diagonals() {
        let one: BitString = "1".parse().unwrap();
        let p = |k: i32| {
            // P(parity 1 | q = 1) for the symmetric ε = 0.1 channel
            (1.0 + 0.8f64.powi(k)) / 2.0
        };
        let inputs = vec![
            exact_level(0, p(1), 1000),
            exact_level(1, p(3), 1000),
            exact_level(2, p(5), 1000),
        ];
        let e1 = mitigate(&inputs, 1).unwrap();
        assert!((e1.value.at(&one) - 0.972).abs() < 1e-12);
        let e2 = mitigate(&inputs, 2).unwrap();
        assert!((e2.value.at(&one) - (1.0 - 0.00856)).abs() < 1e-12);
        assert!(mitigate(&inputs[..2], 2).is_err());
    }

    #[test]
    fn noiseless_inputs_pass_through() {
        let one: BitString = "1".parse().unwrap();
        let inputs = vec![exact_level(0, 1.0, 10), exact_level(1, 1.0, 10)];
        let e = mitigate(&inputs, 1).unwrap();
        assert_eq!(e.value.at(&one), 1.0);
        assert_eq!(e.stderr.at(&one), 0.0);
    }

    #[test]
    fn mixed_schemes_rejected() {
        let mut b = exact_level(1, 0.9, 10);
        b.scheme = Scheme::Weighted;
        assert!(matches!(
            mitigate(&[exact_level(0, 0.9, 10), b], 1),
            Err(Error::SchemeMismatch(..))
        ));
    }

    #[test]
    fn scalar_combination_is_linear() {
        let lv = |j, v| ScalarLevel {
            j,
            value: v,
            stderr: 0.1,
            n_shots: 1,
        };
        let e = mitigate_scalar("basic", &[lv(0, 2.0), lv(1, 4.0)], 1).unwrap();
        assert_eq!(e.value.scalar(), Some(1.5 * 2.0 - 0.5 * 4.0));
        assert!((e.stderr.scalar().unwrap() - (2.25f64 * 0.01 + 0.25 * 0.01).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bootstrap_of_bernoulli_mean() {
        let contributions: Vec<Vec<(usize, f64)>> = (0..10_000)
            .map(|i| if i % 10 == 0 { vec![] } else { vec![(0, 1.0)] })
            .collect();
        let sd = bootstrap_vector(&contributions, 1, 400, 3).unwrap()[0];
        assert!((sd / 0.003 - 1.0).abs() < 0.2);
        let again = bootstrap_vector(&contributions, 1, 400, 3).unwrap()[0];
        assert_eq!(sd, again);
    }
}
