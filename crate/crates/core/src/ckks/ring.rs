//! Elements of the negacyclic ring `Z_q[X] / (X^N + 1)`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;

use super::CkksError;
use crate::modarith::{centered, sample_gaussian, sample_uniform_centered};

/// `N` centered coefficients, constant term first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingElement {
    coeffs: Vec<BigInt>,
    q: BigInt,
}

impl RingElement {
    /// Reduces every coefficient into the centered set.
    pub fn from_coeffs(coeffs: Vec<BigInt>, q: &BigInt) -> Self {
        RingElement {
            coeffs: coeffs.iter().map(|c| centered(c, q)).collect(),
            q: q.clone(),
        }
    }

    pub fn zero(n: usize, q: &BigInt) -> Self {
        RingElement {
            coeffs: vec![BigInt::zero(); n],
            q: q.clone(),
        }
    }

    /// `c X^0`.
    pub fn constant(c: &BigInt, n: usize, q: &BigInt) -> Self {
        let mut e = Self::zero(n, q);
        e.coeffs[0] = centered(c, q);
        e
    }

    pub fn uniform<R: Rng + ?Sized>(n: usize, q: &BigInt, rng: &mut R) -> Self {
        RingElement {
            coeffs: (0..n).map(|_| sample_uniform_centered(q, rng)).collect(),
            q: q.clone(),
        }
    }

    pub fn gaussian<R: Rng + ?Sized>(n: usize, q: &BigInt, sigma: f64, rng: &mut R) -> Self {
        let coeffs = (0..n).map(|_| BigInt::from(sample_gaussian(sigma, rng))).collect();
        Self::from_coeffs(coeffs, q)
    }

    /// Coefficients drawn uniformly from `{-1, 0, 1}`.
    pub fn ternary<R: Rng + ?Sized>(n: usize, q: &BigInt, rng: &mut R) -> Self {
        let coeffs = (0..n).map(|_| BigInt::from(rng.gen_range(-1i8..=1))).collect();
        Self::from_coeffs(coeffs, q)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len()
    }

    pub fn modulus(&self) -> &BigInt {
        &self.q
    }

    fn check(&self, other: &Self) -> Result<(), CkksError> {
        if self.coeffs.len() != other.coeffs.len() || self.q != other.q {
            return Err(CkksError::DimensionMismatch {
                left: self.coeffs.len(),
                right: other.coeffs.len(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, CkksError> {
        self.check(other)?;
        Ok(RingElement {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| centered(&(a + b), &self.q))
                .collect(),
            q: self.q.clone(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, CkksError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        RingElement {
            coeffs: self.coeffs.iter().map(|a| centered(&-a, &self.q)).collect(),
            q: self.q.clone(),
        }
    }

    pub fn scalar_mul(&self, c: &BigInt) -> Self {
        RingElement {
            coeffs: self.coeffs.iter().map(|a| centered(&(a * c), &self.q)).collect(),
            q: self.q.clone(),
        }
    }

    /// Schoolbook product with `X^N = -1`.
    pub fn mul(&self, other: &Self) -> Result<Self, CkksError> {
        self.check(other)?;
        let n = self.coeffs.len();
        let mut acc = vec![BigInt::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                let k = i + j;
                if k < n {
                    acc[k] += a * b;
                } else {
                    acc[k - n] -= a * b;
                }
            }
        }
        Ok(Self::from_coeffs(acc, &self.q))
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .map(|(i, c)| format!("{c}*X^{i}"))
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}
