//! Fixed-point encoding of reals into residues and the matching decoding.

use num_bigint::BigInt;
use num_traits::{FromPrimitive, Signed};

use crate::modarith::{self, ModError};

/// Which representative set a residue lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Repr {
    /// `[0, q)`; negatives wrap to the upper half.
    NonNeg,
    /// `[-q/2, q/2)`.
    Centered,
}

impl Repr {
    pub fn reduce(self, z: &BigInt, q: &BigInt) -> Result<BigInt, ModError> {
        match self {
            Repr::NonNeg => modarith::reduce_nonneg(z, q),
            Repr::Centered => modarith::reduce_centered(z, q),
        }
    }
}

/// An encoded value together with the public data needed to decode it.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointCode {
    pub value: BigInt,
    pub scale: f64,
    pub modulus: BigInt,
    pub repr: Repr,
}

impl FixedPointCode {
    /// Wraps an already reduced residue. The residue is re-reduced so the
    /// representative invariant always holds.
    pub fn new(value: &BigInt, scale: f64, modulus: &BigInt, repr: Repr) -> Result<Self, ModError> {
        Ok(FixedPointCode {
            value: repr.reduce(value, modulus)?,
            scale,
            modulus: modulus.clone(),
            repr,
        })
    }

    /// Signed integer the residue stands for (centered view).
    pub fn signed_value(&self) -> BigInt {
        match self.repr {
            Repr::Centered => self.value.clone(),
            Repr::NonNeg => modarith::centered(&self.value, &self.modulus),
        }
    }
}

/// `round(s * x)` with ties to even.
pub fn round_scaled(x: f64, s: f64) -> BigInt {
    let v = (s * x).round_ties_even();
    BigInt::from_f64(v).expect("encoded value must be finite")
}

/// Encodes `x` as `round(s x) mod q` in the requested representative set.
pub fn ecd(x: f64, s: f64, q: &BigInt, repr: Repr) -> Result<FixedPointCode, ModError> {
    debug_assert!(s >= 1.0, "scale must be at least 1");
    FixedPointCode::new(&round_scaled(x, s), s, q, repr)
}

/// Partial inverse of the modulo operation followed by division by the scale.
pub fn dcd(code: &FixedPointCode) -> f64 {
    modarith::to_f64(&code.signed_value()) / code.scale
}

/// Element-wise [`ecd`] of a gain matrix, returning the residues.
pub fn encode_gain_matrix(
    m: &[Vec<f64>],
    s: f64,
    q: &BigInt,
    repr: Repr,
) -> Result<Vec<Vec<BigInt>>, ModError> {
    m.iter()
        .map(|row| {
            row.iter()
                .map(|&x| ecd(x, s, q, repr).map(|c| c.value))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundVerdict {
    Ok,
    OverflowRisk,
}

/// `Ok` iff every integer of magnitude `max_abs` lies in `[-q/2, q/2)`.
pub fn bound_check(max_abs: &BigInt, q: &BigInt) -> BoundVerdict {
    if (max_abs.abs() << 1usize) < *q {
        BoundVerdict::Ok
    } else {
        BoundVerdict::OverflowRisk
    }
}
