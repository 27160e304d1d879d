//! Exact enumeration of outcome-sequence probabilities.
//!
//! A forward recursion over `(outcome prefix, physical state)`: each slot
//! applies the decay/excitation kernel to the state, then branches on the
//! readout outcome. The physical state is summed out at the last slot, so the
//! peak table holds `2^(n·slots)` cells.
//!
//! A sequence is indexed by `Σ_t o_t << (n·t)` where `o_t` is the outcome
//! index of slot `t` (qubit 0 in the low bit). Slots include any leading
//! post-selection measurements.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Range, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::analysis::stats::Kahan;
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::mitigation::parity::{majority_bits, weight_bits};
use crate::mitigation::Tally;
use crate::noise::PrepMode;
use crate::noise::{QubitNoise, ReadoutModel};
use crate::sim::drift::NoiseState;
use crate::sim::engine::SimConfig;
use crate::sim::plan::Scheme;
use crate::taylor::TaylorCoefficients;

/// Largest `n·slots` the oracle will enumerate.
pub const MAX_SEQUENCE_BITS: usize = 24;
/// Largest `n·slots` for the exact-rational mode.
pub const MAX_EXACT_BITS: usize = 12;

/// Arithmetic the oracle can run in: doubles, or exact rationals for
/// certification.
pub trait Scalar:
    Clone
    + Debug
    + Send
    + Sync
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    type Acc: Default + Send;

    /// Exact image of a double.
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn acc_add(acc: &mut Self::Acc, x: &Self);
    fn acc_value(acc: Self::Acc) -> Self;
}

impl Scalar for f64 {
    type Acc = Kahan;

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn acc_add(acc: &mut Kahan, x: &f64) {
        acc.add(*x);
    }

    fn acc_value(acc: Kahan) -> f64 {
        acc.value()
    }
}

#[derive(Default)]
pub struct RationalAcc(Option<BigRational>);

impl Scalar for BigRational {
    type Acc = RationalAcc;

    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite probability")
    }

    fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn acc_add(acc: &mut RationalAcc, x: &BigRational) {
        acc.0 = Some(match acc.0.take() {
            Some(s) => s + x,
            None => x.clone(),
        });
    }

    fn acc_value(acc: RationalAcc) -> BigRational {
        acc.0.unwrap_or_else(BigRational::zero)
    }
}

#[derive(Debug, Clone)]
pub struct Oracle {
    readout: ReadoutModel,
    noise: QubitNoise,
    /// Distribution of the state entering the first slot (the fiducial state
    /// when `postselect > 0`).
    initial: Vec<f64>,
    postselect: usize,
    /// XORed onto the state after the post-selection slots.
    target: BitString,
    resets: bool,
}

impl Oracle {
    /// Starts from the basis state `state`.
    pub fn new(readout: ReadoutModel, noise: QubitNoise, state: &BitString) -> Result<Self> {
        let n = state.width();
        for actual in [readout.n_qubits(), noise.n_qubits()] {
            if actual != n {
                return Err(Error::DimensionMismatch { expected: n, actual });
            }
        }
        if n > crate::matrix::MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits(n));
        }
        let mut initial = vec![0.0; 1 << n];
        initial[state.to_index() as usize] = 1.0;
        Ok(Self {
            readout,
            noise,
            initial,
            postselect: 0,
            target: BitString::zeros(n),
            resets: false,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.target.width()
    }

    /// Replaces the initial state by an arbitrary distribution `q`.
    pub fn with_initial(mut self, q: Vec<f64>) -> Result<Self> {
        if q.len() != self.initial.len() {
            return Err(Error::DimensionMismatch {
                expected: self.initial.len(),
                actual: q.len(),
            });
        }
        self.initial = q;
        Ok(self)
    }

    /// Native preparation of `target` with per-qubit error `x`, preceded by
    /// `k` measurements of the fiducial all-zeros state.
    pub fn with_prep(mut self, x: &[f64], k: usize, target: &BitString) -> Result<Self> {
        let n = self.n_qubits();
        if x.len() != n || target.width() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: x.len(),
            });
        }
        let fiducial: Vec<f64> = (0..1usize << n)
            .map(|s| {
                (0..n)
                    .map(|q| if s >> q & 1 == 1 { x[q] } else { 1.0 - x[q] })
                    .product()
            })
            .collect();
        if k == 0 {
            let t = target.to_index() as usize;
            self.initial = (0..1usize << n).map(|s| fiducial[s ^ t]).collect();
            self.target = BitString::zeros(n);
        } else {
            self.initial = fiducial;
            self.target = target.clone();
        }
        self.postselect = k;
        Ok(self)
    }

    /// After every readout the state is set to the recorded outcome.
    pub fn with_resets(mut self, resets: bool) -> Self {
        self.resets = resets;
        self
    }

    pub fn for_scheme(self, scheme: Scheme) -> Self {
        self.with_resets(scheme.resets_state())
    }

    /// Oracle matching a simulator configuration under the noise `state`,
    /// with twirling folded into the readout. Reset-based preparation and
    /// imperfect resets have no oracle counterpart.
    pub fn for_config(config: &SimConfig, state: &NoiseState, scheme: Scheme) -> Result<Self> {
        if config.reset_infidelity > 0.0 && scheme.resets_state() {
            return Err(Error::InvalidArgument("oracle assumes ideal resets".into()));
        }
        let readout = if config.twirl {
            state.readout.twirled()
        } else {
            state.readout.clone()
        };
        let n = config.target.width();
        let base = Self::new(readout, state.noise.clone(), &BitString::zeros(n))?.for_scheme(scheme);
        let k = postselect_k(config)?;
        base.with_prep(config.prep.x(), k, &config.target)
    }

    /// Enumerates `slots` plan slots (after any post-selection slots).
    pub fn enumerate<T: Scalar>(&self, slots: usize) -> Result<OracleResult<T>> {
        let n = self.n_qubits();
        let total = self.postselect + slots;
        let bits = n * total;
        if bits > MAX_SEQUENCE_BITS {
            return Err(Error::StateSpaceTooLarge { bits });
        }
        if total == 0 {
            return Err(Error::Empty("sequence with no slots"));
        }
        let dim = 1usize << n;
        let states: Vec<BitString> = (0..dim as u64).map(|s| BitString::from_index(s, n)).collect();
        // readout[o * dim + s] = P(o | s); complements are formed in T so the
        // exact mode stays exact.
        let readout: Vec<T> = (0..dim)
            .flat_map(|o| {
                let states = &states;
                (0..dim).map(move |s| match &self.readout {
                    ReadoutModel::Local(l) => l.iter().enumerate().fold(T::one(), |acc, (q, r)| {
                        let p = T::from_f64(r.flip_prob(s >> q & 1 == 1));
                        acc * if (o ^ s) >> q & 1 == 1 { p } else { T::one() - p }
                    }),
                    other => T::from_f64(other.prob(&states[o], &states[s])),
                })
            })
            .collect();
        // kernel[s2 * dim + s] = P(s -> s2) for one slot of decay/excitation
        let kernel: Vec<T> = (0..dim)
            .flat_map(|s2| {
                (0..dim).map(move |s| {
                    (0..n).fold(T::one(), |acc, q| {
                        let g = T::from_f64(self.noise.flip_prob(q, s >> q & 1 == 1));
                        let factor = if (s ^ s2) >> q & 1 == 1 { g } else { T::one() - g };
                        acc * factor
                    })
                })
            })
            .collect();
        let trivial_kernel = self.noise.is_zero();
        let target = self.target.to_index() as usize;

        let mut cur: Vec<T> = self.initial.iter().map(|&p| T::from_f64(p)).collect();
        let mut prefixes = 1usize;
        for t in 0..total {
            if !trivial_kernel {
                cur.par_chunks_mut(dim).for_each(|block| {
                    let next: Vec<T> = (0..dim)
                        .map(|s2| {
                            (0..dim).fold(T::zero(), |acc, s| {
                                acc + kernel[s2 * dim + s].clone() * block[s].clone()
                            })
                        })
                        .collect();
                    block.clone_from_slice(&next);
                });
            }
            if t + 1 == total {
                let mut out = vec![T::zero(); prefixes * dim];
                out.par_chunks_mut(prefixes).enumerate().for_each(|(o, chunk)| {
                    for (p, cell) in chunk.iter_mut().enumerate() {
                        *cell = (0..dim).fold(T::zero(), |acc, s| {
                            acc + cur[p * dim + s].clone() * readout[o * dim + s].clone()
                        });
                    }
                });
                return Ok(OracleResult {
                    n_qubits: n,
                    postselect: self.postselect,
                    slots,
                    table: out,
                });
            }
            let xor_after = self.postselect > 0 && t + 1 == self.postselect;
            let mut next = vec![T::zero(); prefixes * dim * dim];
            let resets = self.resets;
            next.par_chunks_mut(prefixes * dim)
                .enumerate()
                .for_each(|(o, chunk)| {
                    for p in 0..prefixes {
                        let src = &cur[p * dim..(p + 1) * dim];
                        let dst = &mut chunk[p * dim..(p + 1) * dim];
                        if resets {
                            let mass = (0..dim).fold(T::zero(), |acc, s| {
                                acc + src[s].clone() * readout[o * dim + s].clone()
                            });
                            let s2 = if xor_after { o ^ target } else { o };
                            dst[s2] = mass;
                        } else {
                            for s in 0..dim {
                                let s2 = if xor_after { s ^ target } else { s };
                                dst[s2] = src[s].clone() * readout[o * dim + s].clone();
                            }
                        }
                    }
                });
            cur = next;
            prefixes *= dim;
        }
        unreachable!("loop returns at the last slot")
    }

    /// Exact-rational enumeration; limited to `n·slots ≤ 12`.
    pub fn enumerate_exact(&self, slots: usize) -> Result<OracleResult<BigRational>> {
        let bits = self.n_qubits() * (self.postselect + slots);
        if bits > MAX_EXACT_BITS {
            return Err(Error::StateSpaceTooLarge { bits });
        }
        self.enumerate(slots)
    }

    /// Distribution of the tally for level `j` of `scheme`, from a
    /// standalone record of that level.
    pub fn level_distribution<T: Scalar>(&self, scheme: Scheme, j: usize) -> Result<Vec<T>> {
        let table = self.enumerate::<T>(scheme.slots(j))?;
        let table = if self.postselect > 0 {
            table.postselected()?.0
        } else {
            table
        };
        table.tally(Tally::for_scheme(scheme), scheme.window(j))
    }

    /// `Σ_j a_j · tally_j` over levels `0..=m`.
    pub fn mitigated_distribution(&self, scheme: Scheme, m: usize) -> Result<Vec<f64>> {
        let coeffs = TaylorCoefficients::new(m)?.as_f64();
        let mut out = vec![0.0; 1 << self.n_qubits()];
        for (j, a) in coeffs.iter().enumerate() {
            for (o, p) in self.level_distribution::<f64>(scheme, j)?.into_iter().enumerate() {
                out[o] += a * p;
            }
        }
        Ok(out)
    }
}

fn postselect_k(config: &SimConfig) -> Result<usize> {
    match config.prep.mode() {
        PrepMode::Native => Ok(0),
        PrepMode::PostSelected { k } => Ok(k),
        other => Err(Error::InvalidArgument(format!(
            "no oracle for preparation mode {other:?}"
        ))),
    }
}

/// Tallied probability of `config.target` at level `j` under `state`. With
/// local readout every qubit evolves independently, so the probability is a
/// product of single-qubit oracles and the register size is unbounded.
pub fn target_level_probability(
    config: &SimConfig,
    state: &NoiseState,
    scheme: Scheme,
    j: usize,
) -> Result<f64> {
    let target = &config.target;
    let ReadoutModel::Local(locals) = &state.readout else {
        let oracle = Oracle::for_config(config, state, scheme)?;
        return Ok(oracle.level_distribution::<f64>(scheme, j)?[target.to_index() as usize]);
    };
    if config.reset_infidelity > 0.0 && scheme.resets_state() {
        return Err(Error::InvalidArgument("oracle assumes ideal resets".into()));
    }
    let k = postselect_k(config)?;
    let mut p = 1.0;
    for (q, l) in locals.iter().enumerate() {
        let readout = ReadoutModel::Local(vec![*l]);
        let readout = if config.twirl { readout.twirled() } else { readout };
        let noise = QubitNoise::formal(vec![state.noise.gamma_down()[q]], vec![state.noise.gamma_up()[q]]);
        let bit = BitString::from_bits([target.get(q)]);
        let oracle = Oracle::new(readout, noise, &BitString::zeros(1))?
            .for_scheme(scheme)
            .with_prep(&config.prep.x()[q..=q], k, &bit)?;
        p *= oracle.level_distribution::<f64>(scheme, j)?[bit.to_index() as usize];
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult<T> {
    pub n_qubits: usize,
    pub postselect: usize,
    pub slots: usize,
    pub table: Vec<T>,
}

impl<T: Scalar> OracleResult<T> {
    pub fn total_slots(&self) -> usize {
        self.postselect + self.slots
    }

    pub fn total(&self) -> T {
        let mut acc = T::Acc::default();
        for p in &self.table {
            T::acc_add(&mut acc, p);
        }
        T::acc_value(acc)
    }

    /// Index of the sequence whose slot `t` reads `outcomes[t]`.
    pub fn sequence_index(&self, outcomes: &[BitString]) -> usize {
        assert_eq!(outcomes.len(), self.total_slots());
        outcomes
            .iter()
            .enumerate()
            .map(|(t, o)| (o.to_index() as usize) << (self.n_qubits * t))
            .sum()
    }

    /// Probability of a single-qubit sequence written as text, e.g. `"100"`.
    pub fn prob_of(&self, per_qubit: &[&str]) -> Result<T> {
        let seqs: Vec<BitString> = per_qubit.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        let outcomes: Vec<BitString> = (0..self.total_slots())
            .map(|t| BitString::from_bits(seqs.iter().map(|s| s.get(t))))
            .collect();
        Ok(self.table[self.sequence_index(&outcomes)].clone())
    }

    /// Bits of qubit `q` over absolute slots `window`, first slot in bit 0.
    #[inline]
    fn window_bits(&self, idx: usize, q: usize, window: &Range<usize>) -> u64 {
        let mut out = 0u64;
        for (k, t) in window.clone().enumerate() {
            out |= (((idx >> (self.n_qubits * t + q)) & 1) as u64) << k;
        }
        out
    }

    fn bucket<F>(&self, classes: usize, f: F) -> Vec<T>
    where
        F: Fn(usize) -> Option<(usize, f64)>,
    {
        let mut accs: Vec<T::Acc> = (0..classes).map(|_| T::Acc::default()).collect();
        for (idx, p) in self.table.iter().enumerate() {
            if let Some((class, w)) = f(idx) {
                if w == 1.0 {
                    T::acc_add(&mut accs[class], p);
                } else if w != 0.0 {
                    T::acc_add(&mut accs[class], &(p.clone() * T::from_f64(w)));
                }
            }
        }
        accs.into_iter().map(T::acc_value).collect()
    }

    /// Tally over plan-slot `window` (offset past the post-selection slots).
    pub fn tally(&self, kind: Tally, window: Range<usize>) -> Result<Vec<T>> {
        if window.end > self.slots {
            return Err(Error::InvalidPlan(format!(
                "window {window:?} exceeds {} slots",
                self.slots
            )));
        }
        if window.len().is_multiple_of(2) {
            return Err(Error::EvenWindow(window.len()));
        }
        let len = window.len();
        let abs = window.start + self.postselect..window.end + self.postselect;
        let n = self.n_qubits;
        Ok(self.bucket(1 << n, |idx| {
            let mut class = 0usize;
            let mut w = 1.0;
            for q in 0..n {
                let bits = self.window_bits(idx, q, &abs);
                let bit = match kind {
                    Tally::Parity => bits.count_ones() % 2 == 1,
                    Tally::Weighted => {
                        w *= weight_bits(bits, len);
                        bits.count_ones() % 2 == 1
                    }
                    Tally::Majority => majority_bits(bits, len),
                };
                class |= (bit as usize) << q;
            }
            Some((class, w))
        }))
    }

    pub fn parity_distribution(&self, window: Range<usize>) -> Result<Vec<T>> {
        self.tally(Tally::Parity, window)
    }

    pub fn weighted_distribution(&self, window: Range<usize>) -> Result<Vec<T>> {
        self.tally(Tally::Weighted, window)
    }

    pub fn majority_distribution(&self, window: Range<usize>) -> Result<Vec<T>> {
        self.tally(Tally::Majority, window)
    }

    /// Outcome distribution of plan slot `t`.
    pub fn slot_marginal(&self, t: usize) -> Result<Vec<T>> {
        self.tally(Tally::Parity, t..t + 1)
    }

    /// Conditions on all-zero post-selection slots and drops them. Returns the
    /// conditioned table and the success probability.
    pub fn postselected(&self) -> Result<(OracleResult<T>, T)> {
        let k_bits = self.n_qubits * self.postselect;
        let stride = 1usize << k_bits;
        let kept: Vec<T> = self.table.iter().step_by(stride).cloned().collect();
        let mut acc = T::Acc::default();
        for p in &kept {
            T::acc_add(&mut acc, p);
        }
        let success = T::acc_value(acc);
        if success == T::zero() {
            return Err(Error::ZeroDenominator);
        }
        let table = kept.into_iter().map(|p| p / success.clone()).collect();
        Ok((
            OracleResult {
                n_qubits: self.n_qubits,
                postselect: 0,
                slots: self.slots,
                table,
            },
            success,
        ))
    }

    pub fn to_f64(&self) -> OracleResult<f64> {
        OracleResult {
            n_qubits: self.n_qubits,
            postselect: self.postselect,
            slots: self.slots,
            table: self.table.iter().map(Scalar::to_f64).collect(),
        }
    }
}
