//! Exact oracles, uncertainty estimation, drift experiments and diagnostics.

pub mod diagnostics;
pub mod drift;
pub mod extrapolate;
pub mod oracle;
pub mod stats;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::sim::record::RecordSet;

pub use diagnostics::{decay_curves, fit_decay, flag_defective, DecayCurve, DecayFit};
pub use drift::{drift_experiment, DriftReport};
pub use extrapolate::{extrapolate, Extrapolation};
pub use oracle::{Oracle, OracleResult};

/// Computational-basis fidelity: the entry of `dist` at `target`. Signed
/// entries of quasi-distributions are returned as they are.
pub fn fidelity(dist: &[f64], target: &BitString) -> Result<f64> {
    let dim = 1usize << target.width();
    if dist.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: dist.len(),
        });
    }
    Ok(dist[target.to_index() as usize])
}

/// Standard deviation of `estimator` over `resamples` shot-level resamples
/// with replacement. Deterministic for a given seed.
pub fn bootstrap_stderr<F>(records: &RecordSet, estimator: F, resamples: usize, seed: u64) -> Result<f64>
where
    F: Fn(&RecordSet) -> Result<f64> + Sync,
{
    if records.is_empty() {
        return Err(Error::Empty("bootstrap over zero shots"));
    }
    if resamples < 100 {
        return Err(Error::InvalidArgument(format!(
            "bootstrap needs at least 100 resamples, got {resamples}"
        )));
    }
    let n = records.len();
    let values: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let mut sample = RecordSet::new(records.n_qubits, records.slots, records.postselect);
            sample.records = (0..n)
                .map(|_| records.records[rng.gen_range(0..n)].clone())
                .collect();
            estimator(&sample)
        })
        .collect::<Result<_>>()?;
    Ok(stats::mean_std(&values).1)
}
