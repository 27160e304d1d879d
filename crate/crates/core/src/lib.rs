//! Simulation and post-processing of repeated noisy qubit measurements.
//!
//! Bit conventions: qubit 0 is the least significant bit of a basis-state
//! index, and assignment matrices are column-stochastic with `p = M q`.

pub mod analysis;
pub mod bits;
pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub mod matrix;
pub mod mitigation;
pub mod noise;
pub mod sim;
pub mod taylor;

pub use bits::BitString;
pub use channel::{twirl, LocalChannel, TwirledChannel};
pub use error::{Error, Result};
pub use matrix::{apply_power, mitigated_matrix, symmetric_assignment, AssignmentMatrix};
pub use noise::{PrepMode, PrepModel, QubitNoise, ReadoutModel};
pub use taylor::TaylorCoefficients;
