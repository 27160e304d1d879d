//! Taylor (Richardson) coefficients for odd amplification factors.
//!
//! For order `m` the coefficients `a_j`, `j = 0..=m`, satisfy `Σ a_j = 1` and
//! `Σ a_j (2j+1)^l = 0` for `l = 1..=m`, so combining results measured at noise
//! amplification `2j+1` cancels the noise up to order `m`.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Highest order whose coefficients are computed without overflow.
pub const MAX_ORDER: usize = 15;

pub type Rational = Ratio<i128>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaylorCoefficients {
    order: usize,
    coeffs: Vec<Rational>,
}

fn factorial(k: usize) -> i128 {
    (1..=k as i128).product()
}

fn double_factorial_odd(m: usize) -> i128 {
    // (2m+1)!!
    (0..=m as i128).map(|k| 2 * k + 1).product()
}

impl TaylorCoefficients {
    /// `a_j = (-1)^j (2m+1)!! / (2^m (2j+1) j! (m-j)!)` in exact arithmetic.
    pub fn new(order: usize) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(Error::OrderTooLarge(order));
        }
        let numer = double_factorial_odd(order);
        let pow2 = 1i128 << order;
        let coeffs = (0..=order)
            .map(|j| {
                let denom = pow2 * (2 * j as i128 + 1) * factorial(j) * factorial(order - j);
                let sign = if j % 2 == 0 { 1 } else { -1 };
                Rational::new(sign * numer, denom)
            })
            .collect();
        Ok(Self { order, coeffs })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coefficient(&self, j: usize) -> Rational {
        self.coeffs[j]
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    /// `Σ a_j inputs[j]`; `inputs` must hold exactly `order + 1` values.
    pub fn combine(&self, inputs: &[f64]) -> Result<f64> {
        if inputs.len() != self.coeffs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.coeffs.len(),
                actual: inputs.len(),
            });
        }
        Ok(self.as_f64().iter().zip(inputs).map(|(a, x)| a * x).sum())
    }

    /// Standard error of [`combine`](Self::combine) for independent inputs.
    pub fn combine_stderr(&self, stderrs: &[f64]) -> Result<f64> {
        if stderrs.len() != self.coeffs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.coeffs.len(),
                actual: stderrs.len(),
            });
        }
        Ok(self
            .as_f64()
            .iter()
            .zip(stderrs)
            .map(|(a, s)| (a * s).powi(2))
            .sum::<f64>()
            .sqrt())
    }

    /// `Σ_j a_j (2j+1)^power`, exact.
    pub fn moment(&self, power: u32) -> Rational {
        self.coeffs
            .iter()
            .enumerate()
            .fold(Rational::zero(), |acc, (j, a)| {
                acc + *a * Rational::from_integer((2 * j as i128 + 1).pow(power))
            })
    }
}

impl Serialize for TaylorCoefficients {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let strings: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        strings.serialize(serializer)
    }
}
