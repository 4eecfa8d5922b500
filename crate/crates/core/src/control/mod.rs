//! Integer-reformulated state feedback and PI control evaluated over any
//! homomorphic backend.
//!
//! State feedback: `u ~ s^-2 round(sK) round(sx)`.
//! PI control (one loop, `y_ref = 0`):
//!
//! ```text
//! z(k+1) = z(k) + round(s dt) round(s y(k))
//! u(k)  ~ s^-3 (round(s Ki) z(k) + round(s^2 Kp) round(s y(k)))
//! ```
//!
//! with `z(0) = round(s^2 xc(0))`. The cloud only sees ciphertexts; the
//! division by `s^2` or `s^3` happens at the actuator after decryption.

mod backends;

use num_bigint::BigInt;
use thiserror::Error;

use crate::ckks::CkksError;
use crate::encoding::{dcd, ecd, FixedPointCode, Repr};
use crate::lwe_gsw::LweError;
use crate::modarith::ModError;
use crate::paillier::PaillierError;

pub use backends::{CkksBackend, GswBackend, PaillierBackend};

#[derive(Debug, Error)]
pub enum ControlError {
    #[error("{backend} does not support {op}")]
    Unsupported {
        backend: &'static str,
        op: &'static str,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Paillier(#[from] PaillierError),
    #[error(transparent)]
    Lwe(#[from] LweError),
    #[error(transparent)]
    Ckks(#[from] CkksError),
    #[error(transparent)]
    Mod(#[from] ModError),
}

impl ControlError {
    /// True when the failure is a spent multiplicative-depth budget.
    pub fn is_depth_budget(&self) -> bool {
        matches!(self, ControlError::Ckks(CkksError::LevelExhausted { .. }))
    }
}

/// The operations a cryptosystem has to offer to host an encrypted
/// controller: encryption, decryption to an integer residue, `(+)`,
/// plaintext-scalar `(.)`, and optionally ciphertext-ciphertext `(x)`.
pub trait HomomorphicBackend {
    /// Ciphertexts carrying signals and controller states.
    type Ciphertext: Clone;
    /// Ciphertexts carrying encrypted gains in the fully encrypted mode.
    type GainCiphertext: Clone;

    fn name(&self) -> &'static str;

    /// Plaintext modulus the fixed-point codes live in.
    fn modulus(&self) -> &BigInt;

    fn repr(&self) -> Repr;

    fn encode(&self, x: f64, s: f64) -> Result<FixedPointCode, ControlError> {
        Ok(ecd(x, s, self.modulus(), self.repr())?)
    }

    fn encrypt(&mut self, code: &FixedPointCode) -> Result<Self::Ciphertext, ControlError>;

    fn encrypt_gain(&mut self, code: &FixedPointCode) -> Result<Self::GainCiphertext, ControlError>;

    /// Residue in the backend's representative set.
    fn decrypt(&self, ct: &Self::Ciphertext) -> Result<BigInt, ControlError>;

    fn add(&self, a: &Self::Ciphertext, b: &Self::Ciphertext) -> Result<Self::Ciphertext, ControlError>;

    fn mul_plain(
        &self,
        c: &FixedPointCode,
        ct: &Self::Ciphertext,
    ) -> Result<Self::Ciphertext, ControlError>;

    fn mul_cipher(
        &self,
        k: &Self::GainCiphertext,
        ct: &Self::Ciphertext,
    ) -> Result<Self::Ciphertext, ControlError>;

    fn supports_mul_cipher(&self) -> bool;
}

/// `u = K x` with `K` of shape `m x n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFeedbackSpec {
    pub k: Vec<Vec<f64>>,
    pub scale: f64,
}

impl StateFeedbackSpec {
    /// Decode divisor exponent: one product of two `s`-scaled factors.
    pub const DEPTH: u32 = 2;

    /// The benchmark gain `K = (-0.07, 0.06, -0.12)`.
    pub fn benchmark(scale: f64) -> Self {
        StateFeedbackSpec {
            k: vec![vec![-0.07, 0.06, -0.12]],
            scale,
        }
    }
}

/// Scalar PI loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiSpec {
    pub kp: f64,
    pub ki: f64,
    pub dt: f64,
    pub scale: f64,
}

impl PiSpec {
    /// Decode divisor exponent for the control action.
    pub const DEPTH: u32 = 3;
    /// Scale exponent of the integer controller state.
    pub const STATE_DEPTH: u32 = 2;

    /// `Kp = -0.5`, `Ki = -0.75`, `dt = 1`.
    pub fn benchmark(scale: f64) -> Self {
        PiSpec {
            kp: -0.5,
            ki: -0.75,
            dt: 1.0,
            scale,
        }
    }
}

/// Encoded PI gains: `Ki` and `dt` at `s`, `Kp` at `s^2`.
#[derive(Debug, Clone)]
pub struct PiGains<T> {
    pub ki: T,
    pub kp: T,
    pub dt: T,
}

impl<T> PiGains<T> {
    pub fn try_map<U, E>(&self, mut f: impl FnMut(&T) -> Result<U, E>) -> Result<PiGains<U>, E> {
        Ok(PiGains {
            ki: f(&self.ki)?,
            kp: f(&self.kp)?,
            dt: f(&self.dt)?,
        })
    }
}

pub fn encode_sf_gains<B: HomomorphicBackend>(
    backend: &B,
    spec: &StateFeedbackSpec,
) -> Result<Vec<Vec<FixedPointCode>>, ControlError> {
    spec.k
        .iter()
        .map(|row| row.iter().map(|&k| backend.encode(k, spec.scale)).collect())
        .collect()
}

pub fn encode_pi_gains<B: HomomorphicBackend>(
    backend: &B,
    spec: &PiSpec,
) -> Result<PiGains<FixedPointCode>, ControlError> {
    let s = spec.scale;
    Ok(PiGains {
        ki: backend.encode(spec.ki, s)?,
        kp: backend.encode(spec.kp, s * s)?,
        dt: backend.encode(spec.dt, s)?,
    })
}

/// Encrypts one gain ciphertext per encoded gain.
pub fn encrypt_gains<B: HomomorphicBackend>(
    backend: &mut B,
    codes: &[Vec<FixedPointCode>],
) -> Result<Vec<Vec<B::GainCiphertext>>, ControlError> {
    codes
        .iter()
        .map(|row| row.iter().map(|c| backend.encrypt_gain(c)).collect())
        .collect()
}

fn sum_row<B: HomomorphicBackend>(
    backend: &B,
    terms: impl Iterator<Item = Result<B::Ciphertext, ControlError>>,
) -> Result<B::Ciphertext, ControlError> {
    let mut acc: Option<B::Ciphertext> = None;
    for t in terms {
        let t = t?;
        acc = Some(match acc {
            None => t,
            Some(a) => backend.add(&a, &t)?,
        });
    }
    acc.ok_or_else(|| ControlError::Dimension("empty gain row".into()))
}

fn check_width(row: usize, n: usize) -> Result<(), ControlError> {
    if row != n {
        return Err(ControlError::Dimension(format!(
            "gain row has {row} entries, state has {n}"
        )));
    }
    Ok(())
}

/// `round(sK_i1) (.) ct(x_1) (+) ... (+) round(sK_in) (.) ct(x_n)` per row.
pub fn sf_eval_partial<B: HomomorphicBackend>(
    backend: &B,
    enc_k: &[Vec<FixedPointCode>],
    ct_x: &[B::Ciphertext],
) -> Result<Vec<B::Ciphertext>, ControlError> {
    enc_k
        .iter()
        .map(|row| {
            check_width(row.len(), ct_x.len())?;
            sum_row(
                backend,
                row.iter().zip(ct_x).map(|(k, x)| backend.mul_plain(k, x)),
            )
        })
        .collect()
}

/// `ct(round(sK_i1)) (x) ct(x_1) (+) ...` per row; depth one.
pub fn sf_eval_full<B: HomomorphicBackend>(
    backend: &B,
    ct_k: &[Vec<B::GainCiphertext>],
    ct_x: &[B::Ciphertext],
) -> Result<Vec<B::Ciphertext>, ControlError> {
    if !backend.supports_mul_cipher() {
        return Err(ControlError::Unsupported {
            backend: backend.name(),
            op: "ciphertext multiplication",
        });
    }
    ct_k.iter()
        .map(|row| {
            check_width(row.len(), ct_x.len())?;
            sum_row(
                backend,
                row.iter().zip(ct_x).map(|(k, x)| backend.mul_cipher(k, x)),
            )
        })
        .collect()
}

/// One partially encrypted PI step; returns `(ct(u(k)), ct(z(k+1)))`.
pub fn pi_step_partial<B: HomomorphicBackend>(
    backend: &B,
    ct_z: &B::Ciphertext,
    ct_y: &B::Ciphertext,
    gains: &PiGains<FixedPointCode>,
) -> Result<(B::Ciphertext, B::Ciphertext), ControlError> {
    let u = backend.add(
        &backend.mul_plain(&gains.ki, ct_z)?,
        &backend.mul_plain(&gains.kp, ct_y)?,
    )?;
    let z_next = backend.add(ct_z, &backend.mul_plain(&gains.dt, ct_y)?)?;
    Ok((u, z_next))
}

/// One fully encrypted PI step; returns `(ct(u(k)), ct(z(k+1)))`.
pub fn pi_step_full<B: HomomorphicBackend>(
    backend: &B,
    ct_z: &B::Ciphertext,
    ct_y: &B::Ciphertext,
    gains: &PiGains<B::GainCiphertext>,
) -> Result<(B::Ciphertext, B::Ciphertext), ControlError> {
    if !backend.supports_mul_cipher() {
        return Err(ControlError::Unsupported {
            backend: backend.name(),
            op: "ciphertext multiplication",
        });
    }
    let u = backend.add(
        &backend.mul_cipher(&gains.ki, ct_z)?,
        &backend.mul_cipher(&gains.kp, ct_y)?,
    )?;
    let z_next = backend.add(ct_z, &backend.mul_cipher(&gains.dt, ct_y)?)?;
    Ok((u, z_next))
}

/// Actuator-side rescaling: divides the decrypted integer by `s^depth`.
pub fn decode_control(
    value: &BigInt,
    s: f64,
    depth: u32,
    modulus: &BigInt,
    repr: Repr,
) -> Result<f64, ControlError> {
    let code = FixedPointCode::new(value, s.powi(depth as i32), modulus, repr)?;
    Ok(dcd(&code))
}

/// Reference state feedback in real arithmetic.
pub fn plaintext_sf(k: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    k.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

/// Reference PI step in real arithmetic; returns `(u, xc_next)`.
pub fn plaintext_pi(spec: &PiSpec, xc: f64, y: f64) -> (f64, f64) {
    (spec.ki * xc + spec.kp * y, xc + spec.dt * y)
}
