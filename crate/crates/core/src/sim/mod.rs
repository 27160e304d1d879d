//! Monte Carlo generation of shot records.

pub mod drift;
pub mod engine;
pub mod plan;
pub mod record;
pub mod rng;

pub use drift::{DriftSchedule, DriftSegment, Interpolation, NoiseOverride, NoiseState};
pub use engine::{run_prep_parity, run_reset_scheme, run_shots, Feedforward, SimConfig, Simulator};
pub use plan::{ExecutionOrder, Layout, Scheme, SequencePlan};
pub use record::{RecordFormat, RecordSet, ShotRecord};
