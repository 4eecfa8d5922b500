//! Paillier public-key encryption with additive and plaintext-scalar
//! homomorphisms.
//!
//! The default `lambda = 128` used by the demos is far below real-world
//! requirements: 1024-bit primes are actually recommended for proper security.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

use crate::modarith::{self, ModError};

#[derive(Debug, Error)]
pub enum PaillierError {
    #[error("lambda must be at least 4 bits, got {0}")]
    InvalidLambda(u64),
    #[error("message {0} outside [0, pk)")]
    MessageRange(BigInt),
    #[error("ciphertexts were produced under different public keys")]
    KeyMismatch,
    #[error("malformed key file: {0}")]
    Parse(String),
    #[error(transparent)]
    Mod(#[from] ModError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaillierPublicKey {
    n: BigInt,
    n_squared: BigInt,
}

impl PaillierPublicKey {
    fn new(n: BigInt) -> Self {
        let n_squared = &n * &n;
        PaillierPublicKey { n, n_squared }
    }

    /// The public key `pk = p1 * p2`, which is also the plaintext modulus.
    pub fn n(&self) -> &BigInt {
        &self.n
    }

    pub fn n_squared(&self) -> &BigInt {
        &self.n_squared
    }
}

/// A key pair. `sk = (p1 - 1)(p2 - 1)`.
#[derive(Debug, Clone)]
pub struct PaillierKeys {
    public: Arc<PaillierPublicKey>,
    sk: BigInt,
    sk_inv: BigInt,
    lambda: u64,
}

#[derive(Debug, Clone)]
pub struct PaillierCiphertext {
    value: BigInt,
    pk: Arc<PaillierPublicKey>,
}

impl PaillierCiphertext {
    pub fn value(&self) -> &BigInt {
        &self.value
    }

    pub fn public_key(&self) -> &Arc<PaillierPublicKey> {
        &self.pk
    }
}

impl PartialEq for PaillierCiphertext {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && self.pk.n == other.pk.n
    }
}

impl PaillierKeys {
    /// Picks two distinct `lambda`-bit primes.
    pub fn generate<R: Rng + ?Sized>(lambda: u64, rng: &mut R) -> Result<Self, PaillierError> {
        if lambda < 4 {
            return Err(PaillierError::InvalidLambda(lambda));
        }
        loop {
            let p1 = modarith::gen_prime(lambda, rng);
            let p2 = modarith::gen_prime(lambda, rng);
            if p1 == p2 {
                continue;
            }
            let n = &p1 * &p2;
            let sk = (&p1 - 1u8) * (&p2 - 1u8);
            if !n.gcd(&sk).is_one() {
                continue;
            }
            return Self::from_parts(n, sk, lambda);
        }
    }

    fn from_parts(n: BigInt, sk: BigInt, lambda: u64) -> Result<Self, PaillierError> {
        let sk_inv = modarith::mod_inv(&sk, &n)?;
        Ok(PaillierKeys {
            public: Arc::new(PaillierPublicKey::new(n)),
            sk,
            sk_inv,
            lambda,
        })
    }

    pub fn public(&self) -> &Arc<PaillierPublicKey> {
        &self.public
    }

    pub fn pk(&self) -> &BigInt {
        &self.public.n
    }

    pub fn sk(&self) -> &BigInt {
        &self.sk
    }

    pub fn lambda(&self) -> u64 {
        self.lambda
    }

    pub fn encrypt<R: Rng + ?Sized>(
        &self,
        z: &BigInt,
        rng: &mut R,
    ) -> Result<PaillierCiphertext, PaillierError> {
        encrypt(&self.public, z, rng)
    }

    /// `((ct^sk mod pk^2) - 1) / pk * sk^-1 mod pk`.
    pub fn decrypt(&self, ct: &PaillierCiphertext) -> Result<BigInt, PaillierError> {
        if ct.pk.n != self.public.n {
            return Err(PaillierError::KeyMismatch);
        }
        let n = &self.public.n;
        let u = ct.value.modpow(&self.sk, &self.public.n_squared);
        let l = (u - 1u8) / n;
        Ok((l * &self.sk_inv).mod_floor(n))
    }

    /// Two lines of decimal text: `pk` then `sk`.
    pub fn to_text(&self) -> String {
        format!("{}\n{}\n", self.public.n, self.sk)
    }

    pub fn from_text(text: &str) -> Result<Self, PaillierError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let mut next = |what: &str| -> Result<BigInt, PaillierError> {
            let line = lines
                .next()
                .ok_or_else(|| PaillierError::Parse(format!("missing {what}")))?;
            line.parse()
                .map_err(|_| PaillierError::Parse(format!("{what} is not a decimal integer")))
        };
        let n = next("pk")?;
        let sk = next("sk")?;
        if n <= BigInt::one() || sk <= BigInt::zero() {
            return Err(PaillierError::Parse("non-positive key material".into()));
        }
        let lambda = n.bits().div_ceil(2);
        Self::from_parts(n, sk, lambda)
    }

    pub fn save(&self, path: &Path) -> Result<(), PaillierError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, PaillierError> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}

/// `(pk + 1)^z * r^pk mod pk^2` with `r` uniform in `[1, pk)` and coprime to `pk`.
pub fn encrypt<R: Rng + ?Sized>(
    pk: &Arc<PaillierPublicKey>,
    z: &BigInt,
    rng: &mut R,
) -> Result<PaillierCiphertext, PaillierError> {
    let n = &pk.n;
    if *z < BigInt::zero() || z >= n {
        return Err(PaillierError::MessageRange(z.clone()));
    }
    let r = loop {
        let r = modarith::sample_uniform(n, rng);
        if !r.is_zero() && r.gcd(n).is_one() {
            break r;
        }
    };
    let g = n + 1u8;
    let value = (g.modpow(z, &pk.n_squared) * r.modpow(n, &pk.n_squared)).mod_floor(&pk.n_squared);
    Ok(PaillierCiphertext {
        value,
        pk: Arc::clone(pk),
    })
}

fn check_key(pk: &PaillierPublicKey, ct: &PaillierCiphertext) -> Result<(), PaillierError> {
    if ct.pk.n != pk.n {
        Err(PaillierError::KeyMismatch)
    } else {
        Ok(())
    }
}

/// Homomorphic addition: `ct1 * ct2 mod pk^2`.
pub fn add(
    a: &PaillierCiphertext,
    b: &PaillierCiphertext,
    pk: &PaillierPublicKey,
) -> Result<PaillierCiphertext, PaillierError> {
    check_key(pk, a)?;
    check_key(pk, b)?;
    Ok(PaillierCiphertext {
        value: (&a.value * &b.value).mod_floor(&pk.n_squared),
        pk: Arc::clone(&a.pk),
    })
}

/// Multiplication by a public integer: `ct^c mod pk^2`. `c` is first reduced
/// into `[0, pk)`, so negative factors act as their non-negative representative.
pub fn smul(
    ct: &PaillierCiphertext,
    c: &BigInt,
    pk: &PaillierPublicKey,
) -> Result<PaillierCiphertext, PaillierError> {
    check_key(pk, ct)?;
    let c = modarith::reduce_nonneg(c, &pk.n)?;
    Ok(PaillierCiphertext {
        value: ct.value.modpow(&c, &pk.n_squared),
        pk: Arc::clone(&ct.pk),
    })
}
