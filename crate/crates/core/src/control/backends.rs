use std::convert::Infallible;
use std::sync::Arc;

use num_bigint::BigInt;

use super::{ControlError, HomomorphicBackend};
use crate::ckks::{self, CkksCiphertext, CkksParams, CkksPlaintext, CkksSecretKey, EvaluationKey, RingElement};
use crate::encoding::{FixedPointCode, Repr};
use crate::lwe_gsw::{self, gsw, lwe, GswCiphertext, LweCiphertext, LweParams, LweSecretKey};
use crate::modarith::DetRng;
use crate::paillier::{self, PaillierCiphertext, PaillierKeys, PaillierPublicKey};

/// Additively homomorphic only: no fully encrypted mode.
pub struct PaillierBackend {
    keys: PaillierKeys,
    rng: DetRng,
}

impl PaillierBackend {
    pub fn new(keys: PaillierKeys, rng: DetRng) -> Self {
        PaillierBackend { keys, rng }
    }

    pub fn keys(&self) -> &PaillierKeys {
        &self.keys
    }

    fn pk(&self) -> &Arc<PaillierPublicKey> {
        self.keys.public()
    }
}

impl HomomorphicBackend for PaillierBackend {
    type Ciphertext = PaillierCiphertext;
    type GainCiphertext = Infallible;

    fn name(&self) -> &'static str {
        "paillier"
    }

    fn modulus(&self) -> &BigInt {
        self.keys.pk()
    }

    fn repr(&self) -> Repr {
        Repr::NonNeg
    }

    fn encrypt(&mut self, code: &FixedPointCode) -> Result<PaillierCiphertext, ControlError> {
        let z = Repr::NonNeg.reduce(&code.value, self.keys.pk())?;
        Ok(paillier::encrypt(self.keys.public(), &z, &mut self.rng)?)
    }

    fn encrypt_gain(&mut self, _code: &FixedPointCode) -> Result<Infallible, ControlError> {
        Err(ControlError::Unsupported {
            backend: "paillier",
            op: "gain encryption",
        })
    }

    fn decrypt(&self, ct: &PaillierCiphertext) -> Result<BigInt, ControlError> {
        Ok(self.keys.decrypt(ct)?)
    }

    fn add(&self, a: &PaillierCiphertext, b: &PaillierCiphertext) -> Result<PaillierCiphertext, ControlError> {
        Ok(paillier::add(a, b, self.pk())?)
    }

    fn mul_plain(&self, c: &FixedPointCode, ct: &PaillierCiphertext) -> Result<PaillierCiphertext, ControlError> {
        Ok(paillier::smul(ct, &c.value, self.pk())?)
    }

    fn mul_cipher(&self, k: &Infallible, _ct: &PaillierCiphertext) -> Result<PaillierCiphertext, ControlError> {
        match *k {}
    }

    fn supports_mul_cipher(&self) -> bool {
        false
    }
}

/// LWE ciphertexts for signals, GSW ciphertexts for gains.
pub struct GswBackend {
    params: LweParams,
    sk: LweSecretKey,
    rng: DetRng,
}

impl GswBackend {
    /// Samples the secret key from `rng`, which then drives all encryptions.
    pub fn new(params: LweParams, mut rng: DetRng) -> Self {
        let sk = LweSecretKey::generate(&params, &mut rng);
        GswBackend { params, sk, rng }
    }

    pub fn params(&self) -> &LweParams {
        &self.params
    }
}

impl HomomorphicBackend for GswBackend {
    type Ciphertext = LweCiphertext;
    type GainCiphertext = GswCiphertext;

    fn name(&self) -> &'static str {
        "gsw"
    }

    fn modulus(&self) -> &BigInt {
        self.params.modulus()
    }

    fn repr(&self) -> Repr {
        Repr::Centered
    }

    fn encrypt(&mut self, code: &FixedPointCode) -> Result<LweCiphertext, ControlError> {
        Ok(lwe::encrypt(&self.params, &self.sk, &code.signed_value(), &mut self.rng)?)
    }

    fn encrypt_gain(&mut self, code: &FixedPointCode) -> Result<GswCiphertext, ControlError> {
        Ok(gsw::encrypt(&self.params, &self.sk, &code.signed_value(), &mut self.rng)?)
    }

    fn decrypt(&self, ct: &LweCiphertext) -> Result<BigInt, ControlError> {
        Ok(lwe::decrypt(&self.params, &self.sk, ct)?)
    }

    fn add(&self, a: &LweCiphertext, b: &LweCiphertext) -> Result<LweCiphertext, ControlError> {
        Ok(lwe::add(&self.params, a, b)?)
    }

    fn mul_plain(&self, c: &FixedPointCode, ct: &LweCiphertext) -> Result<LweCiphertext, ControlError> {
        Ok(lwe::smul(&self.params, ct, &c.signed_value())?)
    }

    fn mul_cipher(&self, k: &GswCiphertext, ct: &LweCiphertext) -> Result<LweCiphertext, ControlError> {
        Ok(lwe_gsw::external_product(&self.params, k, ct)?)
    }

    fn supports_mul_cipher(&self) -> bool {
        true
    }
}

/// Constant-coefficient CKKS. The code's scale travels with each ciphertext.
pub struct CkksBackend {
    params: CkksParams,
    sk: CkksSecretKey,
    evk: EvaluationKey,
    rng: DetRng,
}

impl CkksBackend {
    pub fn new(params: CkksParams, mut rng: DetRng) -> Self {
        let (sk, evk) = ckks::keygen(&params, &mut rng);
        CkksBackend { params, sk, evk, rng }
    }

    pub fn params(&self) -> &CkksParams {
        &self.params
    }

    fn plaintext(&self, code: &FixedPointCode) -> CkksPlaintext {
        CkksPlaintext {
            poly: RingElement::constant(&code.signed_value(), self.params.n(), self.params.modulus()),
            scale: code.scale,
        }
    }
}

impl HomomorphicBackend for CkksBackend {
    type Ciphertext = CkksCiphertext;
    type GainCiphertext = CkksCiphertext;

    fn name(&self) -> &'static str {
        "ckks"
    }

    fn modulus(&self) -> &BigInt {
        self.params.modulus()
    }

    fn repr(&self) -> Repr {
        Repr::Centered
    }

    fn encrypt(&mut self, code: &FixedPointCode) -> Result<CkksCiphertext, ControlError> {
        let pt = self.plaintext(code);
        Ok(ckks::encrypt(&self.params, &self.sk, &pt, &mut self.rng)?)
    }

    fn encrypt_gain(&mut self, code: &FixedPointCode) -> Result<CkksCiphertext, ControlError> {
        self.encrypt(code)
    }

    fn decrypt(&self, ct: &CkksCiphertext) -> Result<BigInt, ControlError> {
        Ok(ckks::decrypt(&self.sk, ct)?.coeffs()[0].clone())
    }

    fn add(&self, a: &CkksCiphertext, b: &CkksCiphertext) -> Result<CkksCiphertext, ControlError> {
        Ok(ckks::add(a, b)?)
    }

    fn mul_plain(&self, c: &FixedPointCode, ct: &CkksCiphertext) -> Result<CkksCiphertext, ControlError> {
        Ok(ckks::mul_plain(ct, &self.plaintext(c))?)
    }

    fn mul_cipher(&self, k: &CkksCiphertext, ct: &CkksCiphertext) -> Result<CkksCiphertext, ControlError> {
        Ok(ckks::mul(k, ct, &self.evk)?)
    }

    fn supports_mul_cipher(&self) -> bool {
        true
    }
}
