//! Dense readout assignment matrices.
//!
//! Convention: entry `(i, j)` is the probability of reading outcome `i` when
//! the true basis state is `j`, so observed populations are `p = M q`. Basis
//! indices follow [`BitString::to_index`](crate::BitString::to_index).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{check_probability, Error, Result};
use crate::taylor::TaylorCoefficients;

pub const MAX_DENSE_QUBITS: usize = 12;

const STOCHASTIC_TOL: f64 = 1e-12;

/// Serialized as a list of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct AssignmentMatrix {
    n_qubits: usize,
    entries: DMatrix<f64>,
}

impl TryFrom<Vec<Vec<f64>>> for AssignmentMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<AssignmentMatrix> for Vec<Vec<f64>> {
    fn from(m: AssignmentMatrix) -> Self {
        m.entries
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }
}

impl AssignmentMatrix {
    pub fn new(n_qubits: usize, entries: DMatrix<f64>) -> Result<Self> {
        if n_qubits > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits(n_qubits));
        }
        let dim = 1usize << n_qubits;
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: entries.nrows().max(entries.ncols()),
            });
        }
        for value in entries.iter() {
            check_probability("assignment entry", *value)?;
        }
        for (column, col) in entries.column_iter().enumerate() {
            let sum = col.sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NotStochastic { column, sum });
            }
        }
        Ok(Self { n_qubits, entries })
    }

    /// Row-major construction, mostly for literals in tests and configs.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "matrix dimension {dim} is not a power of two"
            )));
        }
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: row.len(),
                });
            }
        }
        let entries = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
        Self::new(dim.trailing_zeros() as usize, entries)
    }

    pub fn identity(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, DMatrix::identity(1 << n_qubits, 1 << n_qubits))
    }

    /// Tensor product of single-qubit matrices; `locals[i]` acts on qubit `i`.
    pub fn local_product(locals: &[AssignmentMatrix]) -> Result<Self> {
        let n = locals.len();
        if n > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits(n));
        }
        for m in locals {
            if m.n_qubits != 1 {
                return Err(Error::DimensionMismatch {
                    expected: 1,
                    actual: m.n_qubits,
                });
            }
        }
        let dim = 1usize << n;
        let entries = DMatrix::from_fn(dim, dim, |o, s| {
            locals
                .iter()
                .enumerate()
                .map(|(q, m)| m.entries[((o >> q) & 1, (s >> q) & 1)])
                .product()
        });
        Self::new(n, entries)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// P(read `outcome` | true state `state`).
    #[inline]
    pub fn prob(&self, outcome: usize, state: usize) -> f64 {
        self.entries[(outcome, state)]
    }

    pub fn column(&self, state: &BitString) -> Vec<f64> {
        self.entries
            .column(state.to_index() as usize)
            .iter()
            .copied()
            .collect()
    }

    /// `self * other`, the readout `other` followed by `self`.
    pub fn compose(&self, other: &AssignmentMatrix) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                actual: other.n_qubits,
            });
        }
        let product = &self.entries * &other.entries;
        Ok(Self {
            n_qubits: self.n_qubits,
            entries: clamp_stochastic(product),
        })
    }

    /// `M^k` by repeated squaring.
    pub fn power(&self, k: usize) -> Self {
        Self {
            n_qubits: self.n_qubits,
            entries: clamp_stochastic(matrix_power(&self.entries, k)),
        }
    }
}

// Round-off can push products a hair outside [0, 1].
fn clamp_stochastic(mut m: DMatrix<f64>) -> DMatrix<f64> {
    for v in m.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    m
}

pub(crate) fn matrix_power(m: &DMatrix<f64>, mut k: usize) -> DMatrix<f64> {
    let mut result = DMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// The single-qubit symmetric readout `[[1-ε, ε], [ε, 1-ε]]`.
pub fn symmetric_assignment(epsilon: f64) -> Result<AssignmentMatrix> {
    check_probability("epsilon", epsilon)?;
    AssignmentMatrix::new(
        1,
        DMatrix::from_row_slice(2, 2, &[1.0 - epsilon, epsilon, epsilon, 1.0 - epsilon]),
    )
}

/// Single-qubit readout with flip probabilities `P(1|0)` and `P(0|1)`.
pub fn asymmetric_assignment(p_0to1: f64, p_1to0: f64) -> Result<AssignmentMatrix> {
    check_probability("p_0to1", p_0to1)?;
    check_probability("p_1to0", p_1to0)?;
    AssignmentMatrix::new(
        1,
        DMatrix::from_row_slice(2, 2, &[1.0 - p_0to1, p_1to0, p_0to1, 1.0 - p_1to0]),
    )
}

/// `M^k q` for odd `k`.
pub fn apply_power(m: &AssignmentMatrix, k: usize, q: &[f64]) -> Result<Vec<f64>> {
    if k.is_multiple_of(2) {
        return Err(Error::EvenPower(k));
    }
    if q.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            actual: q.len(),
        });
    }
    let total: f64 = q.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "probability vector sums to {total}"
        )));
    }
    let v = matrix_power(m.entries(), k) * DVector::from_column_slice(q);
    Ok(v.iter().copied().collect())
}

/// `Σ_k a_k M^(2k+1)`. The result is generally not stochastic.
pub fn mitigated_matrix(m: &AssignmentMatrix, order: usize) -> Result<DMatrix<f64>> {
    let coeffs = TaylorCoefficients::new(order)?.as_f64();
    let square = m.entries() * m.entries();
    let mut odd_power = m.entries().clone();
    let mut acc = DMatrix::zeros(m.dim(), m.dim());
    for (k, a) in coeffs.iter().enumerate() {
        if k > 0 {
            odd_power = &square * &odd_power;
        }
        acc += &odd_power * *a;
    }
    Ok(acc)
}

/// Largest absolute entry of `a - I`.
pub fn distance_from_identity(a: &DMatrix<f64>) -> f64 {
    let dim = a.nrows();
    (a - DMatrix::<f64>::identity(dim, dim)).amax()
}

/// Point mass on basis state `state`.
pub fn basis_vector(state: &BitString) -> Vec<f64> {
    let mut v = vec![0.0; 1 << state.width()];
    v[state.to_index() as usize] = 1.0;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_stochastic(n: usize, rng: &mut impl Rng) -> AssignmentMatrix {
        let dim = 1 << n;
        let mut m = DMatrix::from_fn(dim, dim, |_, _| rng.gen::<f64>());
        for mut col in m.column_iter_mut() {
            let s = col.sum();
            col /= s;
        }
        AssignmentMatrix::new(n, m).unwrap()
    }

    #[test]
    fn symmetric_matrix_edge_values() {
        assert_eq!(
            symmetric_assignment(0.0).unwrap(),
            AssignmentMatrix::identity(1).unwrap()
        );
        let m = symmetric_assignment(0.1).unwrap();
        assert_eq!(m.prob(0, 0), 0.9);
        assert_eq!(m.prob(1, 0), 0.1);
        let half = symmetric_assignment(0.5).unwrap();
        assert!(half.entries().iter().all(|&v| v == 0.5));
        assert!(symmetric_assignment(1.2).is_err());
        assert!(symmetric_assignment(-0.1).is_err());
    }

    #[test]
    fn non_stochastic_input_is_rejected() {
        let bad = DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.2, 0.9]);
        assert!(matches!(
            AssignmentMatrix::new(1, bad),
            Err(Error::NotStochastic { .. })
        ));
    }

    #[test]
    fn cubed_symmetric_readout() {
        let m = symmetric_assignment(0.1).unwrap();
        // q = '1' is index 1.
        let p = apply_power(&m, 3, &[0.0, 1.0]).unwrap();
        assert!((p[1] - 0.756).abs() < 1e-15);
        assert!((p[1] - (0.9f64.powi(3) + 3.0 * 0.01 * 0.9)).abs() < 1e-15);
        assert_eq!(apply_power(&m, 1, &[0.0, 1.0]).unwrap(), vec![0.1, 0.9]);
    }

    #[test]
    fn apply_power_rejects_even_and_mismatched() {
        let m = symmetric_assignment(0.1).unwrap();
        assert!(matches!(
            apply_power(&m, 2, &[0.0, 1.0]),
            Err(Error::EvenPower(2))
        ));
        assert!(matches!(
            apply_power(&m, 3, &[0.0, 0.0, 1.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn power_agrees_with_repeated_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let m = random_stochastic(2, &mut rng);
            for s in 0..4 {
                let mut q = vec![0.0; 4];
                q[s] = 1.0;
                let fast = apply_power(&m, 5, &q).unwrap();
                let mut slow = DVector::from_column_slice(&q);
                for _ in 0..5 {
                    slow = m.entries() * slow;
                }
                for (a, b) in fast.iter().zip(slow.iter()) {
                    assert!((a - b).abs() < 1e-14);
                }
            }
            let p = m.power(7);
            for col in p.entries().column_iter() {
                assert!((col.sum() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mitigated_symmetric_matrices() {
        let m = symmetric_assignment(0.1).unwrap();
        let m1 = mitigated_matrix(&m, 1).unwrap();
        assert!((m1[(0, 0)] - 0.972).abs() < 1e-14);
        assert!((m1[(1, 0)] - 0.028).abs() < 1e-14);
        let m2 = mitigated_matrix(&m, 2).unwrap();
        let eps: f64 = 0.1;
        let off = 10.0 * eps.powi(3) - 15.0 * eps.powi(4) + 6.0 * eps.powi(5);
        assert!((m2[(0, 1)] - off).abs() < 1e-14);
        assert!((off - 0.00856).abs() < 1e-15);
        let clean = symmetric_assignment(0.0).unwrap();
        for order in 0..5 {
            assert!(distance_from_identity(&mitigated_matrix(&clean, order).unwrap()) < 1e-15);
        }
    }

    #[test]
    fn residual_scales_as_order_plus_one() {
        for order in 0..4 {
            let eps = [0.02, 0.04, 0.08];
            let res: Vec<f64> = eps
                .iter()
                .map(|&e| {
                    distance_from_identity(
                        &mitigated_matrix(&symmetric_assignment(e).unwrap(), order).unwrap(),
                    )
                })
                .collect();
            let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
            let ys: Vec<f64> = res.iter().map(|r| r.ln()).collect();
            let slope = crate::analysis::stats::linear_fit(&xs, &ys).slope;
            assert!(
                (slope - (order as f64 + 1.0)).abs() <= 0.2,
                "order {order}: slope {slope}"
            );
            for (e, r) in eps.iter().zip(&res) {
                assert!(r / e.powi(order as i32 + 1) < 50.0);
            }
        }
    }

    #[test]
    fn local_product_uses_lsb_qubit_zero() {
        let a = asymmetric_assignment(0.1, 0.0).unwrap();
        let id = AssignmentMatrix::identity(1).unwrap();
        let m = AssignmentMatrix::local_product(&[a, id]).unwrap();
        // state 00 -> outcome "10" (qubit 0 flipped) is index 1.
        assert!((m.prob(1, 0) - 0.1).abs() < 1e-15);
        assert_eq!(m.prob(2, 0), 0.0);
    }
}
