//! Shot-level Monte Carlo generator.
//!
//! Each measurement slot first applies the per-qubit decay/excitation flips
//! to the physical state and then samples a readout of the new state. With
//! twirling on, a fresh random mask `t` is drawn per slot: the readout sees
//! `state ⊕ t` and the recorded bits are corrected by `⊕ t`, so the physical
//! state is untouched and the record is a sample of the twirled channel.

use std::borrow::Cow;

use rayon::prelude::*;

use crate::bits::BitString;
use crate::error::{check_probability, Error, Result};
use crate::matrix::AssignmentMatrix;
use crate::noise::{LocalReadout, PrepMode, PrepModel, QubitNoise, ReadoutModel};
use crate::sim::drift::{DriftSchedule, Interpolation, NoiseState};
use crate::sim::plan::{ExecutionOrder, Layout, Scheme, SequencePlan};
use crate::sim::record::{RecordSet, ShotRecord};
use crate::sim::rng::{Purpose, ShotRng};

/// Outcome-to-observable map for a dynamic circuit: the parity of `qubit`
/// over the level's window selects `a0` or `a1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feedforward {
    pub qubit: usize,
    pub a0: f64,
    pub a1: f64,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub readout: ReadoutModel,
    pub noise: QubitNoise,
    pub prep: PrepModel,
    /// Intended initial state.
    pub target: BitString,
    pub twirl: bool,
    pub drift: DriftSchedule,
    /// Probability that the conditional X after a reset misfires.
    pub reset_infidelity: f64,
    pub feedforward: Option<Feedforward>,
}

impl SimConfig {
    pub fn new(readout: ReadoutModel, noise: QubitNoise, target: BitString) -> Self {
        let n = target.width();
        Self {
            readout,
            noise,
            prep: PrepModel::ideal(n),
            target,
            twirl: false,
            drift: DriftSchedule::constant(),
            reset_infidelity: 0.0,
            feedforward: None,
        }
    }
}

/// Readout prepared for sampling.
#[derive(Debug, Clone)]
enum Sampler {
    /// Cumulative columns of a dense matrix.
    Dense {
        n: usize,
        cdf: Vec<Vec<f64>>,
    },
    Masks {
        cdf: Vec<f64>,
        masks: Vec<BitString>,
    },
    Local(Vec<LocalReadout>),
}

fn cumulative(weights: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

fn pick(cdf: &[f64], u: f64) -> usize {
    // Round-off can leave the last entry just below 1.
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

impl Sampler {
    fn new(model: &ReadoutModel) -> Self {
        match model {
            ReadoutModel::Dense(m) => Self::dense(m),
            ReadoutModel::Twirled(c) => Self::Masks {
                cdf: cumulative(c.terms().iter().map(|(_, w)| *w)),
                masks: c.terms().iter().map(|(m, _)| m.clone()).collect(),
            },
            ReadoutModel::Local(l) => Self::Local(l.clone()),
        }
    }

    fn dense(m: &AssignmentMatrix) -> Self {
        let e = m.entries();
        Self::Dense {
            n: m.n_qubits(),
            cdf: (0..m.dim())
                .map(|j| cumulative(e.column(j).iter().copied()))
                .collect(),
        }
    }

    fn sample(&self, state: &BitString, rng: &mut ShotRng) -> BitString {
        match self {
            Self::Dense { n, cdf } => {
                let col = &cdf[state.to_index() as usize];
                BitString::from_index(pick(col, rng.uniform()) as u64, *n)
            }
            Self::Masks { cdf, masks } => state ^ &masks[pick(cdf, rng.uniform())],
            Self::Local(l) => {
                let mut out = state.clone();
                for (q, r) in l.iter().enumerate() {
                    if rng.bernoulli(r.flip_prob(state.get(q))) {
                        out.flip(q);
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Resolved {
    sampler: Sampler,
    noise: QubitNoise,
}

impl Resolved {
    fn new(state: &NoiseState) -> Self {
        Self {
            sampler: Sampler::new(&state.readout),
            noise: state.noise.clone(),
        }
    }
}

/// Read-only after construction; shots may be generated from any thread.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: SimConfig,
    plan: SequencePlan,
    base: Resolved,
    /// Pre-resolved step segments, parallel to `config.drift.segments`.
    steps: Vec<Resolved>,
}

impl Simulator {
    pub fn new(config: SimConfig, plan: SequencePlan) -> Result<Self> {
        let n = config.target.width();
        if n == 0 {
            return Err(Error::InvalidArgument("at least one qubit is required".into()));
        }
        for actual in [
            config.readout.n_qubits(),
            config.noise.n_qubits(),
            config.prep.n_qubits(),
        ] {
            if actual != n {
                return Err(Error::DimensionMismatch { expected: n, actual });
            }
        }
        config.readout.validate()?;
        if !config.noise.is_valid() {
            return Err(Error::InvalidArgument(
                "decay/excitation rates must lie in [0, 1] for sampling".into(),
            ));
        }
        check_probability("reset_infidelity", config.reset_infidelity)?;
        if let Some(ff) = &config.feedforward {
            if ff.qubit >= n {
                return Err(Error::InvalidArgument(format!(
                    "feedforward qubit {} out of range",
                    ff.qubit
                )));
            }
        }
        let base_state = NoiseState {
            readout: config.readout.clone(),
            noise: config.noise.clone(),
        };
        let base = Resolved::new(&base_state);
        let steps = if config.drift.interpolation == Interpolation::Step {
            config
                .drift
                .segments
                .iter()
                .map(|s| Resolved::new(&config.drift.resolve(s.start, &base_state)))
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            config,
            plan,
            base,
            steps,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn plan(&self) -> &SequencePlan {
        &self.plan
    }

    pub fn n_qubits(&self) -> usize {
        self.config.target.width()
    }

    fn resolved(&self, shot: u64) -> Cow<'_, Resolved> {
        let drift = &self.config.drift;
        if drift.is_constant() {
            return Cow::Borrowed(&self.base);
        }
        match drift.interpolation {
            Interpolation::Step => {
                let i = drift.segments.partition_point(|s| s.end <= shot);
                match self.steps.get(i) {
                    Some(r) => Cow::Borrowed(r),
                    None => Cow::Borrowed(&self.base),
                }
            }
            Interpolation::Linear => {
                let base = NoiseState {
                    readout: self.config.readout.clone(),
                    noise: self.config.noise.clone(),
                };
                Cow::Owned(Resolved::new(&drift.resolve(shot, &base)))
            }
        }
    }

    /// Degrade `state` for one slot, then return its twirl-corrected readout.
    fn measure(&self, r: &Resolved, state: &mut BitString, slot: usize, rng: &mut ShotRng) -> BitString {
        let n = state.width();
        if !r.noise.is_zero() {
            rng.at(slot, Purpose::Decay);
            for q in 0..n {
                if rng.bernoulli(r.noise.flip_prob(q, state.get(q))) {
                    state.flip(q);
                }
            }
        }
        if self.config.twirl {
            rng.at(slot, Purpose::Twirl);
            let mut mask = BitString::zeros(n);
            let mut word = 0u64;
            for q in 0..n {
                if q % 64 == 0 {
                    word = rng.next_u64();
                }
                mask.set(q, word >> (q % 64) & 1 == 1);
            }
            let input = &*state ^ &mask;
            rng.at(slot, Purpose::Readout);
            r.sampler.sample(&input, rng) ^ &mask
        } else {
            rng.at(slot, Purpose::Readout);
            r.sampler.sample(state, rng)
        }
    }

    fn misfire(&self, state: &mut BitString, slot: usize, rng: &mut ShotRng) {
        let p = self.config.reset_infidelity;
        if p > 0.0 {
            rng.at(slot, Purpose::Reset);
            for q in 0..state.width() {
                if rng.bernoulli(p) {
                    state.flip(q);
                }
            }
        }
    }

    /// Generates one shot with `slots` plan slots. The feedforward value, if
    /// configured, uses the window of level `ff_level`.
    pub fn shot(&self, index: u64, slots: usize, ff_level: usize, seed: u64) -> ShotRecord {
        let n = self.n_qubits();
        let r = self.resolved(index);
        let mut rng = ShotRng::new(seed, index);
        let prep = &self.config.prep;

        rng.at(0, Purpose::Prep);
        let wrong = BitString::from_bits(prep.x().iter().map(|&x| rng.bernoulli(x)));
        let mut slot = 0usize;
        let mut postselect = vec![BitString::zeros(prep.postselect_slots()); n];
        let mut state = match prep.mode() {
            PrepMode::Native => wrong ^ &self.config.target,
            PrepMode::PostSelected { k } => {
                // Fiducial measurements of the nominal |0…0⟩ before the
                // target is written.
                let mut fid = wrong;
                for i in 0..k {
                    let out = self.measure(&r, &mut fid, slot, &mut rng);
                    for (q, seq) in postselect.iter_mut().enumerate() {
                        seq.set(i, out.get(q));
                    }
                    slot += 1;
                }
                fid ^ &self.config.target
            }
            PrepMode::ConditionalReset | PrepMode::ParityReset { .. } => {
                let reps = prep.prep_slots();
                let mut s = wrong;
                let mut par = BitString::zeros(n);
                for _ in 0..reps {
                    par ^= &self.measure(&r, &mut s, slot, &mut rng);
                    slot += 1;
                }
                s ^= &par;
                self.misfire(&mut s, slot - 1, &mut rng);
                s ^ &self.config.target
            }
        };
        let prep_state = state.clone();

        let resets = self.plan.scheme.resets_state();
        let mut qubits = vec![BitString::zeros(slots); n];
        for t in 0..slots {
            let out = self.measure(&r, &mut state, slot, &mut rng);
            for (q, seq) in qubits.iter_mut().enumerate() {
                seq.set(t, out.get(q));
            }
            if resets {
                state = out;
                self.misfire(&mut state, slot, &mut rng);
            }
            slot += 1;
        }

        let ff_value = self.config.feedforward.and_then(|ff| {
            let w = self.plan.window(ff_level);
            (w.end <= slots).then(|| {
                if qubits[ff.qubit].parity_in(w) {
                    ff.a1
                } else {
                    ff.a0
                }
            })
        });
        ShotRecord {
            shot: index,
            qubits,
            prep: prep_state,
            postselect,
            ff_value,
        }
    }

    /// Shots `0..n_shots` in parallel. Output does not depend on the thread
    /// count.
    pub fn run(&self, layout: Layout, n_shots: u64, seed: u64) -> Result<RecordSet> {
        if n_shots == 0 {
            return Err(Error::Empty("run with zero shots"));
        }
        self.config.drift.validate(n_shots, self.n_qubits())?;
        let slots = self.plan.record_slots(layout)?;
        let ff_level = match layout {
            Layout::Shared => self.plan.j_max,
            Layout::Level(j) => j,
        };
        let records = (0..n_shots)
            .into_par_iter()
            .map(|i| self.shot(i, slots, ff_level, seed))
            .collect();
        Ok(RecordSet {
            n_qubits: self.n_qubits(),
            slots,
            postselect: self.config.prep.postselect_slots(),
            records,
        })
    }

    /// Shots `0..n_shots` with level `order.level(i)` for shot `i`, each shot
    /// recording only its level's slots. Returns one record set per level.
    pub fn run_levels(&self, order: ExecutionOrder, n_shots: u64, seed: u64) -> Result<Vec<RecordSet>> {
        let m = self.plan.j_max;
        if n_shots < m as u64 + 1 {
            return Err(Error::InvalidArgument(format!(
                "{n_shots} shots cannot cover {} levels",
                m + 1
            )));
        }
        self.config.drift.validate(n_shots, self.n_qubits())?;
        let scheme = self.plan.scheme;
        let shots: Vec<(usize, ShotRecord)> = (0..n_shots)
            .into_par_iter()
            .map(|i| {
                let j = order.level(i, n_shots, m);
                (j, self.shot(i, scheme.slots(j), j, seed))
            })
            .collect();
        let mut sets: Vec<RecordSet> = (0..=m)
            .map(|j| {
                RecordSet::new(
                    self.n_qubits(),
                    scheme.slots(j),
                    self.config.prep.postselect_slots(),
                )
            })
            .collect();
        for (j, r) in shots {
            sets[j].records.push(r);
        }
        Ok(sets)
    }
}

/// Generic entry point: builds the simulator and runs it.
pub fn run_shots(
    config: SimConfig,
    plan: SequencePlan,
    layout: Layout,
    n_shots: u64,
    seed: u64,
) -> Result<RecordSet> {
    Simulator::new(config, plan)?.run(layout, n_shots, seed)
}

/// Measure, reset, conditional X on the outcome, repeated `2 j_max + 1` times.
/// Round `2j+1` (slot `2j`) is distributed as `M^(2j+1) q`.
pub fn run_reset_scheme(
    m: &AssignmentMatrix,
    noise: QubitNoise,
    q: BitString,
    j_max: usize,
    n_shots: u64,
    seed: u64,
) -> Result<RecordSet> {
    let config = SimConfig::new(ReadoutModel::Dense(m.clone()), noise, q);
    run_shots(
        config,
        SequencePlan::new(Scheme::Reset, j_max),
        Layout::Shared,
        n_shots,
        seed,
    )
}

/// Single-qubit parity-controlled reset of an incoming state that is wrong
/// with probability `x`. The record's `prep` holds the state after the reset
/// (target `0`).
pub fn run_prep_parity(
    epsilon: f64,
    gamma: f64,
    x: f64,
    j: usize,
    n_shots: u64,
    seed: u64,
) -> Result<RecordSet> {
    check_probability("epsilon", epsilon)?;
    let mut config = SimConfig::new(
        ReadoutModel::symmetric(&[epsilon]),
        QubitNoise::uniform(1, gamma, 0.0)?,
        BitString::zeros(1),
    );
    config.prep = PrepModel::new(vec![x], PrepMode::ParityReset { j })?;
    run_shots(
        config,
        SequencePlan::new(Scheme::Basic, 0),
        Layout::Level(0),
        n_shots,
        seed,
    )
}
