//! Measurement-sequence layouts for each amplification scheme.
//!
//! Windows are slot ranges inside the plan's measurement slots (preparation
//! and post-selection slots are stored separately). For every scheme the
//! window of level `j` is the same whether the record was generated for that
//! level alone or as a shared record for all levels up to `j_max`:
//!
//! | scheme            | slots for level j | window       |
//! |-------------------|-------------------|--------------|
//! | basic, weighted   | 2j+1              | 0..2j+1      |
//! | majority          | 2j+1              | 0..2j+1      |
//! | dummy             | 3j+1              | j..3j+1      |
//! | dummy-posterior   | 4j+2              | j..3j+1      |
//! | reset             | 2j+1              | 2j..2j+1     |

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Basic,
    Dummy,
    DummyPosterior,
    Weighted,
    Reset,
    Majority,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Basic,
        Scheme::Dummy,
        Scheme::DummyPosterior,
        Scheme::Weighted,
        Scheme::Reset,
        Scheme::Majority,
    ];

    pub fn slots(self, j: usize) -> usize {
        match self {
            Scheme::Basic | Scheme::Weighted | Scheme::Majority | Scheme::Reset => 2 * j + 1,
            Scheme::Dummy => 3 * j + 1,
            Scheme::DummyPosterior => 4 * j + 2,
        }
    }

    pub fn window(self, j: usize) -> Range<usize> {
        match self {
            Scheme::Basic | Scheme::Weighted | Scheme::Majority => 0..2 * j + 1,
            Scheme::Dummy | Scheme::DummyPosterior => j..3 * j + 1,
            Scheme::Reset => 2 * j..2 * j + 1,
        }
    }

    /// Whether nested windows of one record can serve every level.
    pub fn supports_shared(self) -> bool {
        // Posterior dummies after a shorter window would sit inside the window
        // of the next level.
        self != Scheme::DummyPosterior
    }

    pub fn resets_state(self) -> bool {
        self == Scheme::Reset
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Basic => "basic",
            Scheme::Dummy => "dummy",
            Scheme::DummyPosterior => "dummy-posterior",
            Scheme::Weighted => "weighted",
            Scheme::Reset => "reset",
            Scheme::Majority => "majority",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scheme {s:?}")))
    }
}

/// Which amplification levels one record serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// One record per shot covering every level `0..=j_max` by nested windows.
    Shared,
    /// Records for the single level `j` (a separate circuit per level).
    Level(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequencePlan {
    pub scheme: Scheme,
    pub j_max: usize,
}

impl SequencePlan {
    pub fn new(scheme: Scheme, j_max: usize) -> Self {
        Self { scheme, j_max }
    }

    pub fn window(&self, j: usize) -> Range<usize> {
        self.scheme.window(j)
    }

    pub fn record_slots(&self, layout: Layout) -> Result<usize> {
        match layout {
            Layout::Shared if !self.scheme.supports_shared() => Err(Error::InvalidPlan(format!(
                "scheme {} cannot share records across levels",
                self.scheme
            ))),
            Layout::Shared => Ok(self.scheme.slots(self.j_max)),
            Layout::Level(j) if j > self.j_max => Err(Error::InvalidPlan(format!(
                "level {j} exceeds j_max {}",
                self.j_max
            ))),
            Layout::Level(j) => Ok(self.scheme.slots(j)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExecutionOrder {
    /// Shot `i` runs level `i mod (m+1)`.
    Interleaved,
    /// Consecutive blocks of shots per level, lowest level first.
    Blocked,
}

impl ExecutionOrder {
    pub fn level(self, shot: u64, n_shots: u64, m: usize) -> usize {
        let levels = m as u64 + 1;
        match self {
            Self::Interleaved => (shot % levels) as usize,
            Self::Blocked => (shot * levels / n_shots) as usize,
        }
    }
}
