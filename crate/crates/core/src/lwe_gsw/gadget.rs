//! Base-`B` gadget decomposition with unsigned digits.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::LweParams;
use crate::modarith;

/// Little-endian base-`B` digits of the non-negative representative of each
/// entry, `d` digits per entry, concatenated in entry order.
pub fn decompose(params: &LweParams, v: &[BigInt]) -> Vec<u64> {
    decompose_with(v, params.modulus(), params.base(), params.digits())
}

pub(crate) fn decompose_with(v: &[BigInt], q: &BigInt, base: u64, digits: usize) -> Vec<u64> {
    let base_big = BigInt::from(base);
    let mut out = Vec::with_capacity(v.len() * digits);
    for x in v {
        let mut r = x.mod_floor(q);
        for _ in 0..digits {
            let (quot, digit) = r.div_rem(&base_big);
            out.push(digit.to_u64().expect("digit below base"));
            r = quot;
        }
        debug_assert!(r.is_zero(), "base^d must cover q");
    }
    out
}

/// Dot product with the gadget vector `(1, B, ..., B^{d-1})` per entry,
/// reduced into `[0, q)`.
pub fn recompose(params: &LweParams, digits: &[u64]) -> Vec<BigInt> {
    digits
        .chunks(params.digits())
        .map(|chunk| {
            chunk
                .iter()
                .rev()
                .fold(BigInt::zero(), |acc, &d| acc * params.base() + d)
                .mod_floor(params.modulus())
        })
        .collect()
}

/// Gadget matrix entry `G[row][col]`: `B^l` when `row = col * d + l`, else 0.
pub(crate) fn gadget_entry(params: &LweParams, row: usize, col: usize) -> Option<BigInt> {
    let d = params.digits();
    (row / d == col).then(|| BigInt::from(params.base()).pow((row % d) as u32))
}

pub(crate) fn centered_vec(params: &LweParams, v: Vec<BigInt>) -> Vec<BigInt> {
    v.into_iter()
        .map(|x| modarith::centered(&x, params.modulus()))
        .collect()
}
