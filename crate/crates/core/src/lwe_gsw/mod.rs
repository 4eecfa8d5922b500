//! Symmetric LWE encryption and GSW ciphertexts.
//!
//! LWE ciphertexts `(b, a)` satisfy `b + <a, sk> = z + e (mod q)` and support
//! addition and multiplication by public integers. GSW ciphertexts are
//! `(N+1)d x (N+1)` matrices `C = Z + z G` where each row of `Z` is an LWE
//! encryption of zero and `G = I_{N+1} (x) (1, B, ..., B^{d-1})^T`. They
//! multiply into LWE ciphertexts (external product) or into each other.
//!
//! All residues are kept in the centered set `[-q/2, q/2)`.

pub mod gadget;
pub mod gsw;
pub mod lwe;

use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

pub use gadget::{decompose, recompose};
pub use gsw::{external_product, GswCiphertext};
pub use lwe::{LweCiphertext, LweSecretKey};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LweError {
    #[error("invalid LWE parameters: {0}")]
    InvalidParams(String),
    #[error("message {0} outside the centered range [-q/2, q/2)")]
    MessageRange(BigInt),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("malformed ciphertext text: {0}")]
    Parse(String),
}

/// Frozen parameter set: secret dimension `N`, modulus `q`, gadget base `B`,
/// digit count `d = ceil(log_B q)` and noise width `sigma`.
#[derive(Debug, Clone, PartialEq)]
pub struct LweParams {
    dim: usize,
    q: BigInt,
    base: u64,
    digits: usize,
    sigma: f64,
}

impl LweParams {
    pub fn new(dim: usize, q: BigInt, base: u64, sigma: f64) -> Result<Self, LweError> {
        if dim == 0 {
            return Err(LweError::InvalidParams("dimension must be positive".into()));
        }
        if q <= BigInt::one() {
            return Err(LweError::InvalidParams(format!("modulus {q} must exceed 1")));
        }
        if base < 2 {
            return Err(LweError::InvalidParams(format!("base {base} must be at least 2")));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(LweError::InvalidParams(format!("sigma {sigma} must be finite and >= 0")));
        }
        let digits = digit_count(&q, base);
        Ok(LweParams {
            dim,
            q,
            base,
            digits,
            sigma,
        })
    }

    /// `N = 4`, `q = 10^20`, `B = 10`, `sigma = 3.2`.
    pub fn demo() -> Self {
        LweParams::new(4, BigInt::from(10u8).pow(20), 10, 3.2).expect("demo parameters are valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modulus(&self) -> &BigInt {
        &self.q
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn digits(&self) -> usize {
        self.digits
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Largest magnitude a fresh error sample can take, `floor(6 sigma)`.
    pub fn noise_bound(&self) -> BigInt {
        BigInt::from((6.0 * self.sigma).floor() as i64)
    }

    /// Number of GSW rows, `(N + 1) d`.
    pub fn gsw_rows(&self) -> usize {
        (self.dim + 1) * self.digits
    }

    pub(crate) fn in_range(&self, z: &BigInt) -> bool {
        let twice = z << 1usize;
        twice >= -&self.q && twice < self.q
    }
}

/// Smallest `d` with `base^d >= q`.
pub(crate) fn digit_count(q: &BigInt, base: u64) -> usize {
    let mut d = 0;
    let mut pow = BigInt::one();
    while pow < *q {
        pow *= base;
        d += 1;
    }
    d
}
