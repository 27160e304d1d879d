//! Noise parameters: readout, per-slot qubit degradation and preparation.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::channel::{twirl, TwirledChannel};
use crate::error::{check_probability, Error, Result};
use crate::matrix::AssignmentMatrix;

/// Per-qubit decay (`1 → 0`) and excitation (`0 → 1`) probabilities, applied
/// to the physical state once before every measurement slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitNoise {
    gamma_down: Vec<f64>,
    gamma_up: Vec<f64>,
}

impl QubitNoise {
    pub fn new(gamma_down: Vec<f64>, gamma_up: Vec<f64>) -> Result<Self> {
        if gamma_down.len() != gamma_up.len() {
            return Err(Error::DimensionMismatch {
                expected: gamma_down.len(),
                actual: gamma_up.len(),
            });
        }
        for &g in &gamma_down {
            check_probability("gamma_down", g)?;
        }
        for &g in &gamma_up {
            check_probability("gamma_up", g)?;
        }
        Ok(Self { gamma_down, gamma_up })
    }

    pub fn uniform(n_qubits: usize, gamma_down: f64, gamma_up: f64) -> Result<Self> {
        Self::new(vec![gamma_down; n_qubits], vec![gamma_up; n_qubits])
    }

    pub fn none(n_qubits: usize) -> Self {
        Self {
            gamma_down: vec![0.0; n_qubits],
            gamma_up: vec![0.0; n_qubits],
        }
    }

    /// Symmetric bit-flip noise, `γ↓ = γ↑ = gamma`.
    pub fn bit_flip(n_qubits: usize, gamma: f64) -> Result<Self> {
        Self::uniform(n_qubits, gamma, gamma)
    }

    /// Rates without the `[0, 1]` check. The exact oracle is polynomial in the
    /// rates, so this is how it is evaluated at e.g. `γ = -h` for a central
    /// difference. Never pass these to the Monte Carlo simulator.
    pub fn formal(gamma_down: Vec<f64>, gamma_up: Vec<f64>) -> Self {
        assert_eq!(gamma_down.len(), gamma_up.len());
        Self { gamma_down, gamma_up }
    }

    pub fn n_qubits(&self) -> usize {
        self.gamma_down.len()
    }

    pub fn gamma_down(&self) -> &[f64] {
        &self.gamma_down
    }

    pub fn gamma_up(&self) -> &[f64] {
        &self.gamma_up
    }

    /// Flip probability for qubit `q` currently in state `bit`.
    #[inline]
    pub fn flip_prob(&self, q: usize, bit: bool) -> f64 {
        if bit {
            self.gamma_down[q]
        } else {
            self.gamma_up[q]
        }
    }

    pub fn is_zero(&self) -> bool {
        self.gamma_down.iter().chain(&self.gamma_up).all(|&g| g == 0.0)
    }

    pub(crate) fn is_valid(&self) -> bool {
        self.gamma_down
            .iter()
            .chain(&self.gamma_up)
            .all(|g| (0.0..=1.0).contains(g))
    }
}

/// Independent single-qubit readout with flip probabilities `P(1|0)`, `P(0|1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalReadout {
    pub p_0to1: f64,
    pub p_1to0: f64,
}

impl LocalReadout {
    pub fn symmetric(epsilon: f64) -> Self {
        Self {
            p_0to1: epsilon,
            p_1to0: epsilon,
        }
    }

    #[inline]
    pub fn flip_prob(&self, bit: bool) -> f64 {
        if bit {
            self.p_1to0
        } else {
            self.p_0to1
        }
    }

    fn validate(&self) -> Result<()> {
        check_probability("p_0to1", self.p_0to1)?;
        check_probability("p_1to0", self.p_1to0)
    }
}

/// How a measurement maps the physical state to a recorded outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadoutModel {
    /// Arbitrary (possibly correlated, non-symmetric) assignment matrix.
    Dense(AssignmentMatrix),
    /// Mask distribution; no twirl needed.
    Twirled(TwirledChannel),
    /// Independent per-qubit readout; scales to many qubits.
    Local(Vec<LocalReadout>),
}

impl ReadoutModel {
    pub fn symmetric(epsilons: &[f64]) -> Self {
        Self::Local(epsilons.iter().map(|&e| LocalReadout::symmetric(e)).collect())
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            Self::Dense(m) => m.n_qubits(),
            Self::Twirled(c) => c.n_qubits(),
            Self::Local(l) => l.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Dense(_) => Ok(()),
            Self::Twirled(c) if c.is_quasi() => Err(Error::InvalidChannel(
                "readout channel must be a physical (non-quasi) channel".into(),
            )),
            Self::Twirled(_) => Ok(()),
            Self::Local(l) => l.iter().try_for_each(LocalReadout::validate),
        }
    }

    /// The readout as seen after averaging over measurement twirls.
    pub fn twirled(&self) -> Self {
        match self {
            Self::Dense(m) => Self::Twirled(twirl(m)),
            Self::Twirled(c) => Self::Twirled(c.clone()),
            Self::Local(l) => Self::Local(
                l.iter()
                    .map(|r| LocalReadout::symmetric(0.5 * (r.p_0to1 + r.p_1to0)))
                    .collect(),
            ),
        }
    }

    /// P(read `outcome` | physical `state`).
    pub fn prob(&self, outcome: &BitString, state: &BitString) -> f64 {
        match self {
            Self::Dense(m) => m.prob(outcome.to_index() as usize, state.to_index() as usize),
            Self::Twirled(c) => c.weight(&(outcome ^ state)),
            Self::Local(l) => l
                .iter()
                .enumerate()
                .map(|(q, r)| {
                    let p = r.flip_prob(state.get(q));
                    if outcome.get(q) == state.get(q) {
                        1.0 - p
                    } else {
                        p
                    }
                })
                .product(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PrepMode {
    /// The device's own preparation: each qubit starts wrong with probability `x`.
    Native,
    /// Measure the incoming state once and flip on outcome 1.
    ConditionalReset,
    /// Measure `2j+1` times and flip on the parity.
    ParityReset { j: usize },
    /// Native preparation followed by `k` recorded fiducial measurements.
    PostSelected { k: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepModel {
    x: Vec<f64>,
    mode: PrepMode,
}

impl PrepModel {
    pub fn new(x: Vec<f64>, mode: PrepMode) -> Result<Self> {
        for &v in &x {
            check_probability("x", v)?;
        }
        Ok(Self { x, mode })
    }

    pub fn ideal(n_qubits: usize) -> Self {
        Self {
            x: vec![0.0; n_qubits],
            mode: PrepMode::Native,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn mode(&self) -> PrepMode {
        self.mode
    }

    /// Number of measurement slots the preparation stage consumes.
    pub fn prep_slots(&self) -> usize {
        match self.mode {
            PrepMode::Native => 0,
            PrepMode::ConditionalReset => 1,
            PrepMode::ParityReset { j } => 2 * j + 1,
            PrepMode::PostSelected { k } => k,
        }
    }

    pub fn postselect_slots(&self) -> usize {
        match self.mode {
            PrepMode::PostSelected { k } => k,
            _ => 0,
        }
    }
}
