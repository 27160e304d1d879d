//! Twirled readout channels as distributions over XOR flip masks.
//!
//! After measurement twirling only identity and bit-flip components of an
//! assignment matrix survive, so the readout becomes `outcome = state ⊕ f`
//! with mask `f` drawn from a fixed distribution. Composing two such channels
//! convolves their mask distributions under XOR, which is why parity over
//! repeated measurements reproduces odd matrix powers.
//!
//! Weights may be negative only for quasi-probability channels, which arise
//! as (approximate) inverses of physical channels.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{check_probability, Error, Result};
use crate::matrix::{AssignmentMatrix, MAX_DENSE_QUBITS};

const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwirledChannel {
    n_qubits: usize,
    /// Sorted by mask, no duplicates.
    terms: Vec<(BitString, f64)>,
    quasi: bool,
}

impl TwirledChannel {
    pub fn new(n_qubits: usize, terms: Vec<(BitString, f64)>, quasi: bool) -> Result<Self> {
        let mut merged: BTreeMap<BitString, f64> = BTreeMap::new();
        for (mask, w) in terms {
            if mask.width() != n_qubits {
                return Err(Error::DimensionMismatch {
                    expected: n_qubits,
                    actual: mask.width(),
                });
            }
            if !w.is_finite() {
                return Err(Error::InvalidChannel(format!(
                    "non-finite weight for mask {mask}"
                )));
            }
            if !quasi && w < 0.0 {
                return Err(Error::InvalidChannel(format!(
                    "negative weight {w} for mask {mask} in a physical channel"
                )));
            }
            if merged.insert(mask.clone(), w).is_some() {
                return Err(Error::InvalidChannel(format!("duplicate mask {mask}")));
            }
        }
        let total: f64 = merged.values().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidChannel(format!("weights sum to {total}")));
        }
        Ok(Self {
            n_qubits,
            terms: merged.into_iter().collect(),
            quasi,
        })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: vec![(BitString::zeros(n_qubits), 1.0)],
            quasi: false,
        }
    }

    /// Single-qubit symmetric flip with probability `epsilon`.
    pub fn bit_flip(epsilon: f64) -> Result<Self> {
        check_probability("epsilon", epsilon)?;
        let terms = vec![("0".parse()?, 1.0 - epsilon), ("1".parse()?, epsilon)];
        Self::new(1, terms.into_iter().filter(|(_, w)| *w != 0.0).collect(), false)
    }

    /// Product of independent symmetric flips, `epsilons[i]` on qubit `i`.
    pub fn local_flips(epsilons: &[f64]) -> Result<Self> {
        let mut acc = Self::identity(0);
        for &e in epsilons {
            acc = acc.tensor(&Self::bit_flip(e)?);
        }
        Ok(acc)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(BitString, f64)] {
        &self.terms
    }

    pub fn is_quasi(&self) -> bool {
        self.quasi
    }

    pub fn weight(&self, mask: &BitString) -> f64 {
        self.terms
            .binary_search_by(|(m, _)| m.cmp(mask))
            .map(|i| self.terms[i].1)
            .unwrap_or(0.0)
    }

    /// Sum of absolute weights; 1 for physical channels.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|(_, w)| w.abs()).sum()
    }

    /// `self ⊗ other`, with `other` on the higher-index qubits.
    pub fn tensor(&self, other: &TwirledChannel) -> Self {
        let n = self.n_qubits + other.n_qubits;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ma, wa) in &self.terms {
            for (mb, wb) in &other.terms {
                let mut mask = BitString::zeros(n);
                for i in 0..self.n_qubits {
                    mask.set(i, ma.get(i));
                }
                for i in 0..other.n_qubits {
                    mask.set(self.n_qubits + i, mb.get(i));
                }
                terms.push((mask, wa * wb));
            }
        }
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        Self {
            n_qubits: n,
            terms,
            quasi: self.quasi || other.quasi,
        }
    }

    /// XOR-convolution: the channel `self` applied after `other`.
    pub fn compose(&self, other: &TwirledChannel) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                actual: other.n_qubits,
            });
        }
        let mut acc: BTreeMap<BitString, f64> = BTreeMap::new();
        for (ma, wa) in &self.terms {
            for (mb, wb) in &other.terms {
                *acc.entry(ma ^ mb).or_insert(0.0) += wa * wb;
            }
        }
        Ok(Self {
            n_qubits: self.n_qubits,
            terms: acc.into_iter().filter(|(_, w)| *w != 0.0).collect(),
            quasi: self.quasi || other.quasi,
        })
    }

    /// `k`-fold self-convolution.
    pub fn power(&self, mut k: usize) -> Self {
        let mut result = Self {
            quasi: self.quasi,
            ..Self::identity(self.n_qubits)
        };
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = result.compose(&base).expect("same width");
            }
            k >>= 1;
            if k > 0 {
                base = base.compose(&base).expect("same width");
            }
        }
        result
    }

    /// Dense matrix with `M[s ⊕ f, s] = α_f`; symmetric and bistochastic.
    pub fn induced_matrix(&self) -> Result<DMatrix<f64>> {
        if self.n_qubits > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits(self.n_qubits));
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for (mask, w) in &self.terms {
            let f = mask.to_index() as usize;
            for s in 0..dim {
                m[(s ^ f, s)] += w;
            }
        }
        Ok(m)
    }

    pub fn to_assignment(&self) -> Result<AssignmentMatrix> {
        if self.quasi {
            return Err(Error::InvalidChannel(
                "quasi-probability channel has no assignment matrix".into(),
            ));
        }
        AssignmentMatrix::new(self.n_qubits, self.induced_matrix()?)
    }

    /// Walsh-Hadamard eigenvalues `λ_S = Σ_f α_f (-1)^{|f ∧ S|}`, indexed by `S`.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if self.n_qubits > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits(self.n_qubits));
        }
        let dim = 1usize << self.n_qubits;
        let mut v = vec![0.0; dim];
        for (mask, w) in &self.terms {
            v[mask.to_index() as usize] += w;
        }
        walsh_hadamard(&mut v);
        Ok(v)
    }

    /// Exact inverse as a quasi-probability channel.
    pub fn inverse(&self) -> Result<Self> {
        let mut lambda = self.eigenvalues()?;
        if let Some(bad) = lambda.iter().find(|l| l.abs() < 1e-12) {
            return Err(Error::InvalidChannel(format!(
                "channel is singular (eigenvalue {bad})"
            )));
        }
        for l in lambda.iter_mut() {
            *l = 1.0 / *l;
        }
        walsh_hadamard(&mut lambda);
        let dim = lambda.len() as f64;
        let terms = lambda
            .into_iter()
            .enumerate()
            .map(|(f, w)| (BitString::from_index(f as u64, self.n_qubits), w / dim))
            .filter(|(_, w)| w.abs() > 0.0)
            .collect();
        Self::new(self.n_qubits, terms, true)
    }
}

fn walsh_hadamard(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for i in (0..v.len()).step_by(2 * h) {
            for k in i..i + h {
                let (a, b) = (v[k], v[k + h]);
                v[k] = a + b;
                v[k + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Pauli-twirl projection of `m`: mask `f` gets weight `2^-n Σ_s M[s ⊕ f, s]`.
pub fn twirl(m: &AssignmentMatrix) -> TwirledChannel {
    let n = m.n_qubits();
    let dim = m.dim();
    let terms = (0..dim)
        .map(|f| {
            let w = (0..dim).map(|s| m.prob(s ^ f, s)).sum::<f64>() / dim as f64;
            (BitString::from_index(f as u64, n), w)
        })
        .filter(|(_, w)| *w > 0.0)
        .collect();
    // Column sums of m are 1 to 1e-12, so the projected weights are too.
    TwirledChannel::new(n, terms, false).expect("twirl of a stochastic matrix is a channel")
}

/// Product of single-qubit mask channels, for qubit counts where the full
/// mask list would be too large. Entry `i` holds `(w_0, w_1)` for qubit `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalChannel {
    per_qubit: Vec<(f64, f64)>,
}

impl LocalChannel {
    pub fn new(per_qubit: Vec<(f64, f64)>) -> Result<Self> {
        for (i, (w0, w1)) in per_qubit.iter().enumerate() {
            if ((w0 + w1) - 1.0).abs() > WEIGHT_TOL {
                return Err(Error::InvalidChannel(format!(
                    "qubit {i}: weights sum to {}",
                    w0 + w1
                )));
            }
        }
        Ok(Self { per_qubit })
    }

    /// Inverse of independent symmetric flips with rates `epsilons`.
    pub fn inverse_flips(epsilons: &[f64]) -> Result<Self> {
        let per_qubit = epsilons
            .iter()
            .map(|&e| {
                check_probability("epsilon", e)?;
                let denom = 1.0 - 2.0 * e;
                if denom.abs() < 1e-12 {
                    return Err(Error::InvalidChannel(format!("flip rate {e} is not invertible")));
                }
                Ok(((1.0 - e) / denom, -e / denom))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(per_qubit)
    }

    pub fn n_qubits(&self) -> usize {
        self.per_qubit.len()
    }

    pub fn per_qubit(&self) -> &[(f64, f64)] {
        &self.per_qubit
    }

    pub fn weight(&self, mask: &BitString) -> f64 {
        self.per_qubit
            .iter()
            .enumerate()
            .map(|(i, (w0, w1))| if mask.get(i) { *w1 } else { *w0 })
            .product()
    }

    /// `k`-fold convolution, computed per qubit from `λ = w0 - w1`.
    pub fn power(&self, k: usize) -> Self {
        let per_qubit = self
            .per_qubit
            .iter()
            .map(|(w0, w1)| {
                let lk = (w0 - w1).powi(k as i32);
                ((1.0 + lk) / 2.0, (1.0 - lk) / 2.0)
            })
            .collect();
        Self { per_qubit }
    }

    pub fn to_twirled(&self) -> Result<TwirledChannel> {
        let mut acc = TwirledChannel::identity(0);
        for &(w0, w1) in &self.per_qubit {
            let single = TwirledChannel {
                n_qubits: 1,
                terms: vec![("0".parse()?, w0), ("1".parse()?, w1)],
                quasi: w0 < 0.0 || w1 < 0.0,
            };
            acc = acc.tensor(&single);
        }
        Ok(acc)
    }
}
