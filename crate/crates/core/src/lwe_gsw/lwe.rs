use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::Rng;

use super::{LweError, LweParams};
use crate::modarith::{centered, sample_gaussian, sample_uniform_centered};

/// Secret vector of `N` centered residues.
#[derive(Debug, Clone, PartialEq)]
pub struct LweSecretKey {
    s: Vec<BigInt>,
}

impl LweSecretKey {
    /// Samples `sk` uniformly from the centered residues.
    pub fn generate<R: Rng + ?Sized>(params: &LweParams, rng: &mut R) -> Self {
        let s = (0..params.dim)
            .map(|_| sample_uniform_centered(&params.q, rng))
            .collect();
        LweSecretKey { s }
    }

    pub fn from_coeffs(s: Vec<BigInt>) -> Self {
        LweSecretKey { s }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.s
    }
}

/// `(b, a)` plus a running bound on the magnitude of the embedded error.
/// The bound is bookkeeping only and is not part of the ciphertext proper.
#[derive(Debug, Clone, PartialEq)]
pub struct LweCiphertext {
    pub(crate) b: BigInt,
    pub(crate) a: Vec<BigInt>,
    pub(crate) error_bound: BigInt,
}

impl LweCiphertext {
    pub fn from_parts(b: BigInt, a: Vec<BigInt>, error_bound: BigInt) -> Self {
        LweCiphertext { b, a, error_bound }
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    pub fn a(&self) -> &[BigInt] {
        &self.a
    }

    pub fn error_bound(&self) -> &BigInt {
        &self.error_bound
    }

    /// `(b, a_1, ..., a_N)` as one vector.
    pub fn to_vector(&self) -> Vec<BigInt> {
        std::iter::once(self.b.clone()).chain(self.a.iter().cloned()).collect()
    }

    /// The all-zero ciphertext, which decrypts to exactly 0.
    pub fn zero(params: &LweParams) -> Self {
        LweCiphertext {
            b: BigInt::zero(),
            a: vec![BigInt::zero(); params.dim],
            error_bound: BigInt::zero(),
        }
    }

    /// One line of space-separated decimals: `b a_1 ... a_N`.
    pub fn to_text(&self) -> String {
        let mut line = self.b.to_string();
        for a in &self.a {
            line.push(' ');
            line.push_str(&a.to_string());
        }
        line.push('\n');
        line
    }

    /// Parses [`LweCiphertext::to_text`] output. The error bound is set to
    /// that of a fresh ciphertext.
    pub fn from_text(params: &LweParams, text: &str) -> Result<Self, LweError> {
        let row = parse_row(text.trim(), params.dim + 1)?;
        Self::from_vector(params, row, params.noise_bound())
    }

    pub(crate) fn from_vector(
        params: &LweParams,
        v: Vec<BigInt>,
        error_bound: BigInt,
    ) -> Result<Self, LweError> {
        if v.len() != params.dim + 1 {
            return Err(LweError::DimensionMismatch {
                expected: params.dim + 1,
                got: v.len(),
            });
        }
        let mut it = v.into_iter().map(|x| centered(&x, &params.q));
        let b = it.next().expect("non-empty");
        Ok(LweCiphertext {
            b,
            a: it.collect(),
            error_bound,
        })
    }
}

pub(crate) fn parse_row(line: &str, expected: usize) -> Result<Vec<BigInt>, LweError> {
    let row = line
        .split_whitespace()
        .map(|t| {
            t.parse::<BigInt>()
                .map_err(|_| LweError::Parse(format!("'{t}' is not a decimal integer")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if row.len() != expected {
        return Err(LweError::DimensionMismatch {
            expected,
            got: row.len(),
        });
    }
    Ok(row)
}

fn check_ct(params: &LweParams, ct: &LweCiphertext) -> Result<(), LweError> {
    if ct.a.len() != params.dim {
        return Err(LweError::DimensionMismatch {
            expected: params.dim,
            got: ct.a.len(),
        });
    }
    Ok(())
}

fn check_key(params: &LweParams, sk: &LweSecretKey) -> Result<(), LweError> {
    if sk.s.len() != params.dim {
        return Err(LweError::DimensionMismatch {
            expected: params.dim,
            got: sk.s.len(),
        });
    }
    Ok(())
}

fn dot(a: &[BigInt], s: &[BigInt]) -> BigInt {
    a.iter().zip(s).map(|(x, y)| x * y).sum()
}

/// LWE encryption of `z` with an explicitly supplied error `e`.
pub fn encrypt_with_error<R: Rng + ?Sized>(
    params: &LweParams,
    sk: &LweSecretKey,
    z: &BigInt,
    e: &BigInt,
    rng: &mut R,
) -> Result<LweCiphertext, LweError> {
    check_key(params, sk)?;
    if !params.in_range(z) {
        return Err(LweError::MessageRange(z.clone()));
    }
    let a: Vec<BigInt> = (0..params.dim)
        .map(|_| sample_uniform_centered(&params.q, rng))
        .collect();
    let b = centered(&(e - dot(&a, &sk.s) + z), &params.q);
    Ok(LweCiphertext {
        b,
        a,
        error_bound: e.abs(),
    })
}

/// `(b, a) + (z, 0)` with `b = -<a, sk> + e`, `a` uniform and `e` Gaussian.
pub fn encrypt<R: Rng + ?Sized>(
    params: &LweParams,
    sk: &LweSecretKey,
    z: &BigInt,
    rng: &mut R,
) -> Result<LweCiphertext, LweError> {
    let e = BigInt::from(sample_gaussian(params.sigma, rng));
    let mut ct = encrypt_with_error(params, sk, z, &e, rng)?;
    ct.error_bound = params.noise_bound();
    Ok(ct)
}

/// `b + <a, sk> mod q`, i.e. the message plus its error.
pub fn decrypt(
    params: &LweParams,
    sk: &LweSecretKey,
    ct: &LweCiphertext,
) -> Result<BigInt, LweError> {
    check_key(params, sk)?;
    check_ct(params, ct)?;
    Ok(centered(&(&ct.b + dot(&ct.a, &sk.s)), &params.q))
}

/// `round((b + <a, sk> mod q) / delta)`. Recovers `z` from an encryption of
/// `delta * z` exactly when `delta * z` is a centered residue and
/// `delta > 2|e|`; otherwise the result is silently wrong.
pub fn decrypt_scaled(
    params: &LweParams,
    sk: &LweSecretKey,
    ct: &LweCiphertext,
    delta: &BigInt,
) -> Result<BigInt, LweError> {
    if !delta.is_positive() {
        return Err(LweError::InvalidParams(format!("delta {delta} must be >= 1")));
    }
    let v = decrypt(params, sk, ct)?;
    let two_delta: BigInt = delta << 1usize;
    Ok(((v << 1usize) + delta).div_floor(&two_delta))
}

/// Component-wise sum mod q; error bounds add.
pub fn add(
    params: &LweParams,
    x: &LweCiphertext,
    y: &LweCiphertext,
) -> Result<LweCiphertext, LweError> {
    check_ct(params, x)?;
    check_ct(params, y)?;
    Ok(LweCiphertext {
        b: centered(&(&x.b + &y.b), &params.q),
        a: x
            .a
            .iter()
            .zip(&y.a)
            .map(|(p, r)| centered(&(p + r), &params.q))
            .collect(),
        error_bound: &x.error_bound + &y.error_bound,
    })
}

/// Multiplication by a public integer; the error bound scales by `|c|`.
pub fn smul(params: &LweParams, ct: &LweCiphertext, c: &BigInt) -> Result<LweCiphertext, LweError> {
    check_ct(params, ct)?;
    Ok(LweCiphertext {
        b: centered(&(&ct.b * c), &params.q),
        a: ct.a.iter().map(|x| centered(&(x * c), &params.q)).collect(),
        error_bound: &ct.error_bound * c.abs(),
    })
}
