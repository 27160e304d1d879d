//! Post-processing estimators over shot records.

pub mod amplify;
pub mod estimate;
pub mod feedforward;
pub mod hybrid;
pub mod parity;
pub mod prep;

use crate::sim::plan::Scheme;

pub use amplify::{amplified_distribution, majority_vote, AmplifiedDistribution, Moments};
pub use estimate::{
    mitigate, mitigate_scalar, mitigate_shared, single_level, MitigationEstimate, Quantity, ScalarLevel,
};
pub use feedforward::feedforward_expectation;
pub use hybrid::{hybrid_inverse, hybrid_inverse_local, twirl_inverse};
pub use parity::{classify_alignment, majority, parity, weight, Alignment};
pub use prep::{post_select, residual_prep_error};

/// How a window is reduced to one outcome per shot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tally {
    Parity,
    /// Parity with the product of per-qubit decay weights.
    Weighted,
    Majority,
}

impl Tally {
    pub fn for_scheme(scheme: Scheme) -> Self {
        match scheme {
            Scheme::Weighted => Tally::Weighted,
            Scheme::Majority => Tally::Majority,
            _ => Tally::Parity,
        }
    }
}
