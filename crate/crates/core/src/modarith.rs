//! Arbitrary-precision modular arithmetic and sampling shared by every scheme.
//!
//! Residues are plain [`BigInt`]s. Two representative sets are used
//! throughout: the non-negative set `[0, q)` and the centered set
//! `[-q/2, q/2)`.

use num_bigint::{BigInt, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

/// Deterministic, seedable generator used by every sampling routine.
///
/// Not intended to be cryptographically secure in this workbench.
pub type DetRng = ChaCha20Rng;

/// Builds a [`DetRng`] from a 64-bit seed.
pub fn seeded_rng(seed: u64) -> DetRng {
    ChaCha20Rng::seed_from_u64(seed)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModError {
    #[error("invalid modulus {0}: must be greater than 1")]
    InvalidModulus(BigInt),
    #[error("{value} is not invertible modulo {modulus}")]
    NotInvertible { value: BigInt, modulus: BigInt },
    #[error("negative exponent {0}")]
    NegativeExponent(BigInt),
}

fn check_modulus(q: &BigInt) -> Result<(), ModError> {
    if *q <= BigInt::one() {
        return Err(ModError::InvalidModulus(q.clone()));
    }
    Ok(())
}

/// Representative of `z` in `[0, q)`.
pub fn reduce_nonneg(z: &BigInt, q: &BigInt) -> Result<BigInt, ModError> {
    check_modulus(q)?;
    Ok(z.mod_floor(q))
}

/// Representative of `z` in `[-q/2, q/2)`.
pub fn reduce_centered(z: &BigInt, q: &BigInt) -> Result<BigInt, ModError> {
    check_modulus(q)?;
    Ok(center_unchecked(z.mod_floor(q), q))
}

/// Maps a residue already in `[0, q)` to the centered set. `q > 1` is assumed.
pub(crate) fn center_unchecked(r: BigInt, q: &BigInt) -> BigInt {
    if (&r << 1usize) >= *q {
        r - q
    } else {
        r
    }
}

/// Centered reduction for callers that have already validated `q`.
pub(crate) fn centered(z: &BigInt, q: &BigInt) -> BigInt {
    center_unchecked(z.mod_floor(q), q)
}

/// `a^b mod n` by square-and-multiply, result in `[0, n)`.
pub fn mod_pow(a: &BigInt, b: &BigInt, n: &BigInt) -> Result<BigInt, ModError> {
    check_modulus(n)?;
    if b.is_negative() {
        return Err(ModError::NegativeExponent(b.clone()));
    }
    let base = a.mod_floor(n);
    Ok(base.modpow(b, n))
}

/// Inverse of `a` modulo `n` via the extended Euclidean algorithm.
pub fn mod_inv(a: &BigInt, n: &BigInt) -> Result<BigInt, ModError> {
    check_modulus(n)?;
    let a_red = a.mod_floor(n);
    let ext = a_red.extended_gcd(n);
    if !ext.gcd.is_one() {
        return Err(ModError::NotInvertible {
            value: a.clone(),
            modulus: n.clone(),
        });
    }
    Ok(ext.x.mod_floor(n))
}

const SMALL_PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

// Deterministic Miller-Rabin witness set valid for every n < 3.3 * 10^24.
const WITNESSES_64: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn miller_rabin_round(n: &BigInt, n_minus_one: &BigInt, d: &BigInt, r: u64, a: &BigInt) -> bool {
    let mut x = a.modpow(d, n);
    if x.is_one() || x == *n_minus_one {
        return true;
    }
    for _ in 1..r {
        x = (&x * &x).mod_floor(n);
        if x == *n_minus_one {
            return true;
        }
        if x.is_one() {
            return false;
        }
    }
    false
}

/// Miller-Rabin with `rounds` random bases. Below 2^64 the fixed witness set
/// is used instead, which makes the answer exact there.
pub fn is_probable_prime<R: Rng + ?Sized>(n: &BigInt, rounds: usize, rng: &mut R) -> bool {
    let two = BigInt::from(2u8);
    if *n < two {
        return false;
    }
    for &p in SMALL_PRIMES.iter() {
        let p = BigInt::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let n_minus_one = n - 1u8;
    let r = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> r;
    if n.bits() <= 64 {
        return WITNESSES_64
            .iter()
            .all(|&a| miller_rabin_round(n, &n_minus_one, &d, r, &BigInt::from(a)));
    }
    let upper = n - 2u8;
    (0..rounds).all(|_| {
        let a = rng.gen_bigint_range(&two, &upper);
        miller_rabin_round(n, &n_minus_one, &d, r, &a)
    })
}

/// Random prime with exactly `bits` bits (top bit set).
///
/// # Panics
/// If `bits < 2`.
pub fn gen_prime<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> BigInt {
    assert!(bits >= 2, "a prime needs at least 2 bits");
    loop {
        let mut candidate = rng.gen_biguint(bits);
        candidate.set_bit(bits - 1, true);
        if bits > 2 {
            candidate.set_bit(0, true);
        }
        let candidate = BigInt::from_biguint(Sign::Plus, candidate);
        if is_probable_prime(&candidate, 40, rng) {
            return candidate;
        }
    }
}

/// Uniform residue in `[0, q)`.
pub fn sample_uniform<R: Rng + ?Sized>(q: &BigInt, rng: &mut R) -> BigInt {
    rng.gen_bigint_range(&BigInt::zero(), q)
}

/// Uniform residue in the centered set `[-q/2, q/2)`.
pub fn sample_uniform_centered<R: Rng + ?Sized>(q: &BigInt, rng: &mut R) -> BigInt {
    center_unchecked(sample_uniform(q, rng), q)
}

/// Rounded continuous Gaussian with standard deviation `sigma`, resampled
/// whenever the rounded magnitude exceeds `6 * sigma`.
pub fn sample_gaussian<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> i64 {
    if sigma <= 0.0 {
        return 0;
    }
    let normal = Normal::new(0.0, sigma).expect("finite positive sigma");
    let cap = 6.0 * sigma;
    loop {
        let v = normal.sample(rng).round();
        if v.abs() <= cap {
            return v as i64;
        }
    }
}

/// Absolute value as `f64`; saturates to infinity for huge inputs.
pub(crate) fn to_f64(z: &BigInt) -> f64 {
    z.to_f64().unwrap_or(if z.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}
