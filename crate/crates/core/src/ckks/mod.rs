//! Symmetric CKKS over `R_q = Z_q[X] / (X^N + 1)` with scalar encoding.
//!
//! There is no rescaling and no modulus chain. The level is a plain depth
//! counter: every ciphertext-ciphertext multiplication spends one level and
//! multiplies the scales, so a value computed with `m` multiplications of
//! `s`-scaled inputs decodes by dividing by `s^(m+1)`. Relinearization uses a
//! base-`B_ks` gadget over `sk^2`.

pub mod ring;

use num_bigint::BigInt;
use num_traits::One;
use rand::Rng;
use thiserror::Error;

use crate::encoding::round_scaled;
use crate::lwe_gsw::{digit_count, gadget::decompose_with};
use crate::modarith::to_f64;
pub use ring::RingElement;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CkksError {
    #[error("invalid CKKS parameters: {0}")]
    InvalidParams(String),
    #[error("ring dimension mismatch ({left} vs {right}) or different moduli")]
    DimensionMismatch { left: usize, right: usize },
    #[error("scale mismatch: {left} vs {right}")]
    ScaleMismatch { left: f64, right: f64 },
    #[error("multiplicative depth exhausted: operand at level {level}")]
    LevelExhausted { level: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CkksParams {
    n: usize,
    q: BigInt,
    scale: f64,
    levels: u32,
    sigma: f64,
    relin_base: u64,
    relin_digits: usize,
}

/// Noise width of the demo parameter set. See the README for why it is
/// much narrower than the LWE default at `s = 10^3`.
pub const DEMO_SIGMA: f64 = 0.2;

impl CkksParams {
    pub fn new(n: usize, q: BigInt, scale: f64, levels: u32, sigma: f64) -> Result<Self, CkksError> {
        if n == 0 || !n.is_power_of_two() {
            return Err(CkksError::InvalidParams(format!("N = {n} is not a power of two")));
        }
        if q <= BigInt::one() {
            return Err(CkksError::InvalidParams(format!("modulus {q} must exceed 1")));
        }
        if !(scale >= 1.0 && scale.is_finite()) {
            return Err(CkksError::InvalidParams(format!("scale {scale} must be >= 1")));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(CkksError::InvalidParams(format!("sigma {sigma} must be >= 0")));
        }
        let relin_base = 10;
        let relin_digits = digit_count(&q, relin_base);
        Ok(CkksParams {
            n,
            q,
            scale,
            levels,
            sigma,
            relin_base,
            relin_digits,
        })
    }

    /// `N = 4`, `q = 10^15`, `s = 10^3`, `L = 2`.
    pub fn demo() -> Self {
        CkksParams::new(4, BigInt::from(10u8).pow(15), 1e3, 2, DEMO_SIGMA)
            .expect("demo parameters are valid")
    }

    pub fn with_relin_base(mut self, base: u64) -> Result<Self, CkksError> {
        if base < 2 {
            return Err(CkksError::InvalidParams(format!("relinearization base {base} < 2")));
        }
        self.relin_base = base;
        self.relin_digits = digit_count(&self.q, base);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> &BigInt {
        &self.q
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn relin_base(&self) -> u64 {
        self.relin_base
    }

    pub fn relin_digits(&self) -> usize {
        self.relin_digits
    }

    /// `floor(6 sigma)`.
    pub fn noise_bound(&self) -> BigInt {
        BigInt::from((6.0 * self.sigma).floor() as i64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CkksSecretKey {
    s: RingElement,
}

impl CkksSecretKey {
    pub fn poly(&self) -> &RingElement {
        &self.s
    }
}

/// Row `i` is an RLWE encryption of `B_ks^i sk^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationKey {
    rows: Vec<(RingElement, RingElement)>,
    base: u64,
}

impl EvaluationKey {
    pub fn rows(&self) -> &[(RingElement, RingElement)] {
        &self.rows
    }
}

/// A message polynomial together with the scale it was encoded at.
#[derive(Debug, Clone, PartialEq)]
pub struct CkksPlaintext {
    pub poly: RingElement,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CkksCiphertext {
    c0: RingElement,
    c1: RingElement,
    level: u32,
    scale: f64,
}

impl CkksCiphertext {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn parts(&self) -> (&RingElement, &RingElement) {
        (&self.c0, &self.c1)
    }
}

/// Samples a ternary `sk` and the relinearization key.
pub fn keygen<R: Rng + ?Sized>(params: &CkksParams, rng: &mut R) -> (CkksSecretKey, EvaluationKey) {
    let sk = RingElement::ternary(params.n, &params.q, rng);
    let sk2 = sk.mul(&sk).expect("same ring");
    let mut factor = BigInt::one();
    let mut rows = Vec::with_capacity(params.relin_digits);
    for _ in 0..params.relin_digits {
        let a = RingElement::uniform(params.n, &params.q, rng);
        let e = RingElement::gaussian(params.n, &params.q, params.sigma, rng);
        let b = e
            .sub(&a.mul(&sk).expect("same ring"))
            .and_then(|b| b.add(&sk2.scalar_mul(&factor)))
            .expect("same ring");
        rows.push((b, a));
        factor *= params.relin_base;
    }
    (
        CkksSecretKey { s: sk },
        EvaluationKey {
            rows,
            base: params.relin_base,
        },
    )
}

/// `round(s x) X^0` with ties to even.
pub fn encode_scalar(x: f64, scale: f64, params: &CkksParams) -> CkksPlaintext {
    CkksPlaintext {
        poly: RingElement::constant(&round_scaled(x, scale), params.n, &params.q),
        scale,
    }
}

/// Constant coefficient divided by `scale`.
pub fn decode_scalar(p: &RingElement, scale: f64) -> f64 {
    to_f64(&p.coeffs()[0]) / scale
}

/// `(b, a) + (z, 0)` with `b = -a sk + e`. Fresh ciphertexts sit at level `L`.
pub fn encrypt<R: Rng + ?Sized>(
    params: &CkksParams,
    sk: &CkksSecretKey,
    pt: &CkksPlaintext,
    rng: &mut R,
) -> Result<CkksCiphertext, CkksError> {
    let a = RingElement::uniform(params.n, &params.q, rng);
    let e = RingElement::gaussian(params.n, &params.q, params.sigma, rng);
    let b = e.sub(&a.mul(&sk.s)?)?;
    Ok(CkksCiphertext {
        c0: b.add(&pt.poly)?,
        c1: a,
        level: params.levels,
        scale: pt.scale,
    })
}

/// `b + a sk = z + e`. Independent of the level.
pub fn decrypt(sk: &CkksSecretKey, ct: &CkksCiphertext) -> Result<RingElement, CkksError> {
    ct.c0.add(&ct.c1.mul(&sk.s)?)
}

/// Decrypts and decodes the constant coefficient at the ciphertext's scale.
pub fn decrypt_scalar(sk: &CkksSecretKey, ct: &CkksCiphertext) -> Result<f64, CkksError> {
    Ok(decode_scalar(&decrypt(sk, ct)?, ct.scale))
}

fn check_scales(a: &CkksCiphertext, b: &CkksCiphertext) -> Result<(), CkksError> {
    if a.scale != b.scale {
        return Err(CkksError::ScaleMismatch {
            left: a.scale,
            right: b.scale,
        });
    }
    Ok(())
}

pub fn add(x: &CkksCiphertext, y: &CkksCiphertext) -> Result<CkksCiphertext, CkksError> {
    check_scales(x, y)?;
    Ok(CkksCiphertext {
        c0: x.c0.add(&y.c0)?,
        c1: x.c1.add(&y.c1)?,
        level: x.level.min(y.level),
        scale: x.scale,
    })
}

pub fn sub(x: &CkksCiphertext, y: &CkksCiphertext) -> Result<CkksCiphertext, CkksError> {
    check_scales(x, y)?;
    Ok(CkksCiphertext {
        c0: x.c0.sub(&y.c0)?,
        c1: x.c1.sub(&y.c1)?,
        level: x.level.min(y.level),
        scale: x.scale,
    })
}

/// Multiplication by an unencrypted polynomial. Scales multiply; the level
/// is left unchanged since no relinearization is involved.
pub fn mul_plain(ct: &CkksCiphertext, pt: &CkksPlaintext) -> Result<CkksCiphertext, CkksError> {
    Ok(CkksCiphertext {
        c0: ct.c0.mul(&pt.poly)?,
        c1: ct.c1.mul(&pt.poly)?,
        level: ct.level,
        scale: ct.scale * pt.scale,
    })
}

/// Tensor product followed by relinearization of the `sk^2` component.
pub fn mul(
    x: &CkksCiphertext,
    y: &CkksCiphertext,
    evk: &EvaluationKey,
) -> Result<CkksCiphertext, CkksError> {
    for ct in [x, y] {
        if ct.level == 0 {
            return Err(CkksError::LevelExhausted { level: 0 });
        }
    }
    let d0 = x.c0.mul(&y.c0)?;
    let d1 = x.c1.mul(&y.c0)?.add(&y.c1.mul(&x.c0)?)?;
    let d2 = x.c1.mul(&y.c1)?;
    let (r0, r1) = relinearize(&d2, evk)?;
    Ok(CkksCiphertext {
        c0: d0.add(&r0)?,
        c1: d1.add(&r1)?,
        level: x.level.min(y.level) - 1,
        scale: x.scale * y.scale,
    })
}

/// Digit polynomials `D_i` with `d2 = sum_i B^i D_i`, combined against the
/// evaluation key rows.
fn relinearize(
    d2: &RingElement,
    evk: &EvaluationKey,
) -> Result<(RingElement, RingElement), CkksError> {
    let q = d2.modulus();
    let n = d2.degree_bound();
    let digits = evk.rows.len();
    let flat = decompose_with(d2.coeffs(), q, evk.base, digits);
    let mut r0 = RingElement::zero(n, q);
    let mut r1 = RingElement::zero(n, q);
    for (i, (b, a)) in evk.rows.iter().enumerate() {
        let digit_poly = RingElement::from_coeffs(
            (0..n).map(|c| BigInt::from(flat[c * digits + i])).collect(),
            q,
        );
        r0 = r0.add(&digit_poly.mul(b)?)?;
        r1 = r1.add(&digit_poly.mul(a)?)?;
    }
    Ok((r0, r1))
}

/// `ct^k` by square-and-multiply; `x^4` costs two levels.
pub fn pow(ct: &CkksCiphertext, k: u32, evk: &EvaluationKey) -> Result<CkksCiphertext, CkksError> {
    if k == 0 {
        return Err(CkksError::InvalidParams("exponent must be at least 1".into()));
    }
    let mut result: Option<CkksCiphertext> = None;
    let mut base = ct.clone();
    let mut e = k;
    loop {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => mul(&r, &base, evk)?,
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = mul(&base, &base, evk)?;
    }
    Ok(result.expect("k >= 1"))
}

/// Multiplies `ct` by the plaintext one encoded at `target / ct.scale`, so
/// terms of different depth can be added.
pub fn align_scale(
    ct: &CkksCiphertext,
    target: f64,
    params: &CkksParams,
) -> Result<CkksCiphertext, CkksError> {
    if ct.scale == target {
        return Ok(ct.clone());
    }
    let ratio = target / ct.scale;
    if ratio < 1.0 || ratio.fract() != 0.0 {
        return Err(CkksError::ScaleMismatch {
            left: ct.scale,
            right: target,
        });
    }
    mul_plain(ct, &encode_scalar(1.0, ratio, params))
}

/// `x^4 + y^2 (x - y) + y`, multiplicative depth 2.
pub fn eval_demo_poly(
    params: &CkksParams,
    x: &CkksCiphertext,
    y: &CkksCiphertext,
    evk: &EvaluationKey,
) -> Result<CkksCiphertext, CkksError> {
    let x4 = pow(x, 4, evk)?;
    let y2 = mul(y, y, evk)?;
    let diff = sub(x, y)?;
    let middle = mul(&y2, &diff, evk)?;
    let target = x4.scale;
    let middle = align_scale(&middle, target, params)?;
    let last = align_scale(y, target, params)?;
    add(&add(&x4, &middle)?, &last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modarith::seeded_rng;
    use num_traits::Signed;

    fn noisy() -> CkksParams {
        CkksParams::new(4, BigInt::from(10u8).pow(15), 1e3, 2, 3.2).unwrap()
    }

    fn exact() -> CkksParams {
        CkksParams::new(4, BigInt::from(10u8).pow(15), 1e3, 2, 0.0).unwrap()
    }

    #[test]
    fn setup_contract() {
        let p = CkksParams::demo();
        assert_eq!((p.n(), p.levels(), p.scale()), (4, 2, 1e3));
        assert_eq!(p.relin_digits(), 15);
        assert!(CkksParams::new(3, BigInt::from(1000), 1e3, 2, 1.0).is_err());
        assert!(CkksParams::new(4, BigInt::from(1000), 1e3, 0, 1.0).is_ok());
        assert!(CkksParams::new(4, BigInt::from(1000), 0.5, 1, 1.0).is_err());
    }

    #[test]
    fn encodes_constant_term() {
        let p = CkksParams::demo();
        let pt = encode_scalar(1.2345, 1e3, &p);
        let want: Vec<BigInt> = [1234, 0, 0, 0].iter().map(|&c| BigInt::from(c)).collect();
        assert_eq!(pt.poly.coeffs(), want.as_slice());
        assert_eq!(encode_scalar(0.0, 1e3, &p).poly, RingElement::zero(4, p.modulus()));
        for i in 0..1000 {
            let x = -10.0 + 0.0173 * i as f64;
            let pt = encode_scalar(x, 1e3, &p);
            assert!((decode_scalar(&pt.poly, 1e3) - x).abs() <= 0.5e-3 + 1e-12);
        }
    }

    #[test]
    fn evk_rows_relation() {
        for params in [exact(), noisy()] {
            let (sk, evk) = keygen(&params, &mut seeded_rng(1));
            let sk2 = sk.poly().mul(sk.poly()).unwrap();
            let mut factor = BigInt::one();
            for (b, a) in evk.rows() {
                let lhs = b.add(&a.mul(sk.poly()).unwrap()).unwrap();
                let e = lhs.sub(&sk2.scalar_mul(&factor)).unwrap();
                assert!(e.coeffs().iter().all(|c| c.abs() <= params.noise_bound()));
                factor *= params.relin_base();
            }
        }
        let a = keygen(&noisy(), &mut seeded_rng(7));
        let b = keygen(&noisy(), &mut seeded_rng(7));
        assert_eq!(a, b);
    }

    #[test]
    fn roundtrips() {
        let mut rng = seeded_rng(2);
        let p = exact();
        let (sk, _) = keygen(&p, &mut rng);
        let pt = encode_scalar(-3.25, 1e3, &p);
        let ct = encrypt(&p, &sk, &pt, &mut rng).unwrap();
        assert_eq!(decrypt(&sk, &ct).unwrap(), pt.poly);
        assert_eq!((ct.level(), ct.scale()), (2, 1e3));

        let p = noisy();
        let (sk, _) = keygen(&p, &mut rng);
        for _ in 0..100 {
            let x = rng.gen_range(-10.0..10.0);
            let pt = encode_scalar(x, 1e3, &p);
            let ct = encrypt(&p, &sk, &pt, &mut rng).unwrap();
            let e = decrypt(&sk, &ct).unwrap().sub(&pt.poly).unwrap();
            assert!(e.coeffs().iter().all(|c| c.abs() <= p.noise_bound()));
            let zero = encrypt(&p, &sk, &encode_scalar(0.0, 1e3, &p), &mut rng).unwrap();
            let z = decrypt(&sk, &zero).unwrap();
            assert!(z.coeffs().iter().all(|c| c.abs() <= p.noise_bound()));
        }
    }

    #[test]
    fn addition_rules() {
        let mut rng = seeded_rng(3);
        let p = noisy();
        let (sk, evk) = keygen(&p, &mut rng);
        let bound = p.noise_bound() * 2u8;
        for _ in 0..100 {
            let (x, y) = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
            let px = encode_scalar(x, 1e3, &p);
            let py = encode_scalar(y, 1e3, &p);
            let cx = encrypt(&p, &sk, &px, &mut rng).unwrap();
            let cy = encrypt(&p, &sk, &py, &mut rng).unwrap();
            let got = decrypt(&sk, &add(&cx, &cy).unwrap()).unwrap();
            let e = &got.coeffs()[0] - &px.poly.coeffs()[0] - &py.poly.coeffs()[0];
            assert!(e.abs() <= bound);
        }
        let one = encrypt(&p, &sk, &encode_scalar(1.0, 1e3, &p), &mut rng).unwrap();
        let two_lvl = encrypt(&p, &sk, &encode_scalar(2.0, 1e3, &p), &mut rng).unwrap();
        let sq = mul(&one, &one, &evk).unwrap();
        assert!(matches!(add(&sq, &two_lvl), Err(CkksError::ScaleMismatch { .. })));
        let lowered = mul_plain(&two_lvl, &encode_scalar(1.0, 1e3, &p)).unwrap();
        assert_eq!(add(&sq, &lowered).unwrap().level(), 1);
    }

    #[test]
    fn multiplication_and_depth() {
        let mut rng = seeded_rng(4);
        let p = CkksParams::demo();
        let (sk, evk) = keygen(&p, &mut rng);
        let cx = encrypt(&p, &sk, &encode_scalar(1.2345, 1e3, &p), &mut rng).unwrap();
        let cy = encrypt(&p, &sk, &encode_scalar(4.5678, 1e3, &p), &mut rng).unwrap();
        let prod = mul(&cx, &cy, &evk).unwrap();
        assert_eq!((prod.level(), prod.scale()), (1, 1e6));
        let v = decrypt_scalar(&sk, &prod).unwrap();
        assert!((v - 1.2345 * 4.5678).abs() <= 0.01, "{v}");

        let one = encrypt(&p, &sk, &encode_scalar(1.0, 1e3, &p), &mut rng).unwrap();
        let same = mul(&cx, &one, &evk).unwrap();
        assert!((decrypt_scalar(&sk, &same).unwrap() - 1.2345).abs() <= 0.01);
        assert_eq!(same.scale(), 1e6);

        let bottom = mul(&prod, &cx, &evk).unwrap();
        assert_eq!(bottom.level(), 0);
        assert!(matches!(
            mul(&bottom, &cx, &evk),
            Err(CkksError::LevelExhausted { level: 0 })
        ));
    }

    #[test]
    fn powers() {
        let mut rng = seeded_rng(5);
        let p = CkksParams::demo();
        let (sk, evk) = keygen(&p, &mut rng);
        let cx = encrypt(&p, &sk, &encode_scalar(1.2345, 1e3, &p), &mut rng).unwrap();
        assert_eq!(pow(&cx, 1, &evk).unwrap(), cx);
        let sq = pow(&cx, 2, &evk).unwrap();
        assert!((decrypt_scalar(&sk, &sq).unwrap() - 1.2345f64.powi(2)).abs() <= 0.01);
        let x4 = pow(&cx, 4, &evk).unwrap();
        assert_eq!(x4.level(), 0);
        assert!(((decrypt_scalar(&sk, &x4).unwrap() - 1.2345f64.powi(4)) / 1.2345f64.powi(4)).abs() <= 0.01);
        assert!(pow(&cx, 3, &evk).is_ok());
        assert!(matches!(pow(&cx, 5, &evk), Err(CkksError::LevelExhausted { .. })));
        assert!(pow(&cx, 0, &evk).is_err());

        let shallow = CkksParams::new(4, BigInt::from(10u8).pow(15), 1e3, 1, DEMO_SIGMA).unwrap();
        let (sk1, evk1) = keygen(&shallow, &mut rng);
        let c1 = encrypt(&shallow, &sk1, &encode_scalar(1.2345, 1e3, &shallow), &mut rng).unwrap();
        assert!(pow(&c1, 2, &evk1).is_ok());
        assert!(matches!(pow(&c1, 4, &evk1), Err(CkksError::LevelExhausted { .. })));
    }

    #[test]
    fn demo_polynomial() {
        let mut rng = seeded_rng(6);
        let p = CkksParams::demo();
        let (sk, evk) = keygen(&p, &mut rng);
        let poly = |x: f64, y: f64| x.powi(4) + y * y * (x - y) + y;
        for (x, y) in [(1.2345, 4.5678), (1.5, 1.5), (0.0, 0.0)] {
            let cx = encrypt(&p, &sk, &encode_scalar(x, 1e3, &p), &mut rng).unwrap();
            let cy = encrypt(&p, &sk, &encode_scalar(y, 1e3, &p), &mut rng).unwrap();
            let r = eval_demo_poly(&p, &cx, &cy, &evk).unwrap();
            assert_eq!((r.level(), r.scale()), (0, 1e12));
            let got = decrypt_scalar(&sk, &r).unwrap();
            let want = poly(x, y);
            assert!((got - want).abs() <= 0.01 * want.abs().max(1.0), "{got} vs {want}");
        }
    }
}
