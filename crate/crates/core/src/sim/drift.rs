//! Time-varying noise over the shot index.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::channel::TwirledChannel;
use crate::error::{check_probability, Error, Result};
use crate::noise::{QubitNoise, ReadoutModel};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    /// Each segment holds its `from` values for its whole range.
    #[default]
    Step,
    /// Each segment moves from `from` at its first shot to `to` at its last.
    Linear,
}

/// Parameters replaced inside a segment. Unset fields keep the base values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_down: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_up: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<TwirledChannel>,
}

impl NoiseOverride {
    fn check(&self, n_qubits: usize) -> Result<()> {
        if self.epsilon.is_some() && self.channel.is_some() {
            return Err(Error::InvalidSchedule(
                "a segment may override epsilon or channel, not both".into(),
            ));
        }
        for (name, v) in [
            ("epsilon", &self.epsilon),
            ("gamma_down", &self.gamma_down),
            ("gamma_up", &self.gamma_up),
        ] {
            if let Some(v) = v {
                if v.len() != n_qubits {
                    return Err(Error::DimensionMismatch {
                        expected: n_qubits,
                        actual: v.len(),
                    });
                }
                for &p in v {
                    check_probability(name, p)?;
                }
            }
        }
        if let Some(c) = &self.channel {
            if c.n_qubits() != n_qubits {
                return Err(Error::DimensionMismatch {
                    expected: n_qubits,
                    actual: c.n_qubits(),
                });
            }
            if c.is_quasi() {
                return Err(Error::InvalidChannel("drift channel must be physical".into()));
            }
        }
        Ok(())
    }

    fn same_fields(&self, other: &Self) -> bool {
        self.epsilon.is_some() == other.epsilon.is_some()
            && self.gamma_down.is_some() == other.gamma_down.is_some()
            && self.gamma_up.is_some() == other.gamma_up.is_some()
            && self.channel.is_some() == other.channel.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSegment {
    /// First shot index (inclusive).
    pub start: u64,
    /// One past the last shot index.
    pub end: u64,
    pub from: NoiseOverride,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<NoiseOverride>,
}

/// The noise in effect at one shot.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseState {
    pub readout: ReadoutModel,
    pub noise: QubitNoise,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DriftSchedule {
    #[serde(default)]
    pub segments: Vec<DriftSegment>,
    #[serde(default)]
    pub interpolation: Interpolation,
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + (y - x) * t).collect()
}

fn lerp_channel(a: &TwirledChannel, b: &TwirledChannel, t: f64) -> TwirledChannel {
    use std::collections::BTreeMap;
    let mut acc: BTreeMap<BitString, f64> = BTreeMap::new();
    for (m, w) in a.terms() {
        *acc.entry(m.clone()).or_default() += (1.0 - t) * w;
    }
    for (m, w) in b.terms() {
        *acc.entry(m.clone()).or_default() += t * w;
    }
    let total: f64 = acc.values().sum();
    let terms = acc.into_iter().map(|(m, w)| (m, w / total)).collect();
    TwirledChannel::new(a.n_qubits(), terms, false).expect("convex mix of channels")
}

impl DriftSchedule {
    pub fn constant() -> Self {
        Self::default()
    }

    /// A single linear segment over `[0, n_shots)`.
    pub fn linear_ramp(n_shots: u64, from: NoiseOverride, to: NoiseOverride) -> Self {
        Self {
            segments: vec![DriftSegment {
                start: 0,
                end: n_shots,
                from,
                to: Some(to),
            }],
            interpolation: Interpolation::Linear,
        }
    }

    /// Two step segments split at `at`.
    pub fn step(n_shots: u64, at: u64, before: NoiseOverride, after: NoiseOverride) -> Self {
        Self {
            segments: vec![
                DriftSegment {
                    start: 0,
                    end: at,
                    from: before,
                    to: None,
                },
                DriftSegment {
                    start: at,
                    end: n_shots,
                    from: after,
                    to: None,
                },
            ],
            interpolation: Interpolation::Step,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.segments.is_empty()
    }

    /// Checks coverage of `[0, n_shots)` and the parameter ranges. Linear
    /// interpolation between two valid endpoints stays valid, so checking the
    /// endpoints covers every shot.
    pub fn validate(&self, n_shots: u64, n_qubits: usize) -> Result<()> {
        if self.segments.is_empty() {
            return Ok(());
        }
        let mut next = 0u64;
        for (i, seg) in self.segments.iter().enumerate() {
            if seg.start != next {
                return Err(Error::InvalidSchedule(format!(
                    "segment {i} starts at {} but the previous one ends at {next}",
                    seg.start
                )));
            }
            if seg.end <= seg.start {
                return Err(Error::InvalidSchedule(format!("segment {i} is empty")));
            }
            seg.from.check(n_qubits)?;
            match (&seg.to, self.interpolation) {
                (Some(to), Interpolation::Linear) => {
                    to.check(n_qubits)?;
                    if !seg.from.same_fields(to) {
                        return Err(Error::InvalidSchedule(format!(
                            "segment {i}: `from` and `to` override different parameters"
                        )));
                    }
                }
                (None, Interpolation::Linear) => {
                    return Err(Error::InvalidSchedule(format!(
                        "segment {i} needs `to` for linear interpolation"
                    )))
                }
                (Some(_), Interpolation::Step) => {
                    return Err(Error::InvalidSchedule(format!(
                        "segment {i} has `to` under step interpolation"
                    )))
                }
                (None, Interpolation::Step) => {}
            }
            next = seg.end;
        }
        if next != n_shots {
            return Err(Error::InvalidSchedule(format!(
                "segments cover [0, {next}) but the run has {n_shots} shots"
            )));
        }
        Ok(())
    }

    pub fn segment_at(&self, shot: u64) -> Option<&DriftSegment> {
        let i = self.segments.partition_point(|s| s.end <= shot);
        self.segments.get(i).filter(|s| s.start <= shot)
    }

    /// The override in effect at `shot`, already interpolated.
    pub fn override_at(&self, shot: u64) -> Option<NoiseOverride> {
        let seg = self.segment_at(shot)?;
        let to = match (&seg.to, self.interpolation) {
            (Some(to), Interpolation::Linear) => to,
            _ => return Some(seg.from.clone()),
        };
        let span = seg.end - seg.start;
        let t = if span > 1 {
            (shot - seg.start) as f64 / (span - 1) as f64
        } else {
            0.0
        };
        let f = &seg.from;
        Some(NoiseOverride {
            epsilon: f
                .epsilon
                .as_ref()
                .zip(to.epsilon.as_ref())
                .map(|(a, b)| lerp(a, b, t)),
            gamma_down: f
                .gamma_down
                .as_ref()
                .zip(to.gamma_down.as_ref())
                .map(|(a, b)| lerp(a, b, t)),
            gamma_up: f
                .gamma_up
                .as_ref()
                .zip(to.gamma_up.as_ref())
                .map(|(a, b)| lerp(a, b, t)),
            channel: f
                .channel
                .as_ref()
                .zip(to.channel.as_ref())
                .map(|(a, b)| lerp_channel(a, b, t)),
        })
    }

    /// Applies the override at `shot` to the base parameters.
    pub fn resolve(&self, shot: u64, base: &NoiseState) -> NoiseState {
        let Some(o) = self.override_at(shot) else {
            return base.clone();
        };
        let readout = match (o.epsilon, o.channel) {
            (Some(eps), _) => ReadoutModel::symmetric(&eps),
            (None, Some(c)) => ReadoutModel::Twirled(c),
            (None, None) => base.readout.clone(),
        };
        let down = o.gamma_down.unwrap_or_else(|| base.noise.gamma_down().to_vec());
        let up = o.gamma_up.unwrap_or_else(|| base.noise.gamma_up().to_vec());
        NoiseState {
            readout,
            // Ranges were checked in `validate`.
            noise: QubitNoise::formal(down, up),
        }
    }
}
