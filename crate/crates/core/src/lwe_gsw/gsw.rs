use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::Rng;

use super::gadget::{centered_vec, decompose, gadget_entry};
use super::lwe::{self, parse_row, LweCiphertext, LweSecretKey};
use super::{LweError, LweParams};
use crate::modarith::centered;

/// `(N+1)d x (N+1)` matrix `C = Z + z G`. Row `j*d + l` carries `z B^l` in
/// column `j` (column 0 is the `b` slot, columns `1..=N` the `a` slots).
#[derive(Debug, Clone, PartialEq)]
pub struct GswCiphertext {
    rows: Vec<Vec<BigInt>>,
    error_bound: BigInt,
    message_bound: BigInt,
}

impl GswCiphertext {
    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    /// Bound on the per-row error magnitude.
    pub fn error_bound(&self) -> &BigInt {
        &self.error_bound
    }

    /// Bound on `|z|`, recorded at encryption time for noise bookkeeping.
    pub fn message_bound(&self) -> &BigInt {
        &self.message_bound
    }

    /// All-zero matrix: a noiseless encryption of 0.
    pub fn zero(params: &LweParams) -> Self {
        GswCiphertext {
            rows: vec![vec![BigInt::zero(); params.dim() + 1]; params.gsw_rows()],
            error_bound: BigInt::zero(),
            message_bound: BigInt::zero(),
        }
    }

    /// One line per row, space-separated decimals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(ToString::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses [`GswCiphertext::to_text`]. Noise bookkeeping is reset to that
    /// of a fresh ciphertext with an unknown message, so `message_bound` is
    /// set to `q/2`.
    pub fn from_text(params: &LweParams, text: &str) -> Result<Self, LweError> {
        let rows = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| parse_row(l, params.dim() + 1).map(|r| centered_vec(params, r)))
            .collect::<Result<Vec<_>, _>>()?;
        if rows.len() != params.gsw_rows() {
            return Err(LweError::DimensionMismatch {
                expected: params.gsw_rows(),
                got: rows.len(),
            });
        }
        Ok(GswCiphertext {
            rows,
            error_bound: params.noise_bound(),
            message_bound: params.modulus() / 2u8,
        })
    }
}

fn check_shape(params: &LweParams, c: &GswCiphertext) -> Result<(), LweError> {
    if c.rows.len() != params.gsw_rows() {
        return Err(LweError::DimensionMismatch {
            expected: params.gsw_rows(),
            got: c.rows.len(),
        });
    }
    if let Some(bad) = c.rows.iter().find(|r| r.len() != params.dim() + 1) {
        return Err(LweError::DimensionMismatch {
            expected: params.dim() + 1,
            got: bad.len(),
        });
    }
    Ok(())
}

pub fn encrypt<R: Rng + ?Sized>(
    params: &LweParams,
    sk: &LweSecretKey,
    z: &BigInt,
    rng: &mut R,
) -> Result<GswCiphertext, LweError> {
    if !params.in_range(z) {
        return Err(LweError::MessageRange(z.clone()));
    }
    let zero = BigInt::zero();
    let rows = (0..params.gsw_rows())
        .map(|i| {
            let mut row = lwe::encrypt(params, sk, &zero, rng)?.to_vector();
            let col = i / params.digits();
            if let Some(g) = gadget_entry(params, i, col) {
                row[col] = centered(&(&row[col] + z * g), params.modulus());
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, LweError>>()?;
    Ok(GswCiphertext {
        rows,
        error_bound: params.noise_bound(),
        message_bound: z.abs(),
    })
}

/// `C (1, sk)`: per row, `z G_i (1, sk) + e_i`.
pub fn phases(
    params: &LweParams,
    sk: &LweSecretKey,
    c: &GswCiphertext,
) -> Result<Vec<BigInt>, LweError> {
    check_shape(params, c)?;
    Ok(c.rows
        .iter()
        .map(|row| {
            let mut acc = row[0].clone();
            for (x, s) in row[1..].iter().zip(sk.coeffs()) {
                acc += x * s;
            }
            centered(&acc, params.modulus())
        })
        .collect())
}

/// `sum_i digits_i * rows_i`, reduced centered.
fn combine(params: &LweParams, digits: &[u64], rows: &[Vec<BigInt>]) -> Vec<BigInt> {
    let width = params.dim() + 1;
    let mut acc = vec![BigInt::zero(); width];
    for (&d, row) in digits.iter().zip(rows) {
        if d == 0 {
            continue;
        }
        for (a, x) in acc.iter_mut().zip(row) {
            *a += x * d;
        }
    }
    centered_vec(params, acc)
}

fn decomposition_noise(params: &LweParams, gsw_error: &BigInt) -> BigInt {
    BigInt::from(params.gsw_rows()) * (params.base() - 1) * gsw_error
}

/// GSW x LWE -> LWE: `g^{-1}((b, a)) C`.
///
/// The error of the result is bounded by
/// `|z_gsw| e_lwe + (N+1) d (B-1) e_gsw`.
pub fn external_product(
    params: &LweParams,
    gsw: &GswCiphertext,
    ct: &LweCiphertext,
) -> Result<LweCiphertext, LweError> {
    check_shape(params, gsw)?;
    if ct.a().len() != params.dim() {
        return Err(LweError::DimensionMismatch {
            expected: params.dim(),
            got: ct.a().len(),
        });
    }
    let digits = decompose(params, &ct.to_vector());
    let v = combine(params, &digits, &gsw.rows);
    let bound = &gsw.message_bound * ct.error_bound() + decomposition_noise(params, &gsw.error_bound);
    LweCiphertext::from_vector(params, v, bound)
}

/// GSW x GSW -> GSW. Each row of `rhs` is decomposed and multiplied into
/// `lhs`, giving an encryption of `z_lhs * z_rhs`.
pub fn mul(
    params: &LweParams,
    lhs: &GswCiphertext,
    rhs: &GswCiphertext,
) -> Result<GswCiphertext, LweError> {
    check_shape(params, lhs)?;
    check_shape(params, rhs)?;
    let rows = rhs
        .rows
        .iter()
        .map(|row| combine(params, &decompose(params, row), &lhs.rows))
        .collect();
    Ok(GswCiphertext {
        rows,
        error_bound: &lhs.message_bound * &rhs.error_bound
            + decomposition_noise(params, &lhs.error_bound),
        message_bound: &lhs.message_bound * &rhs.message_bound,
    })
}

pub fn add(
    params: &LweParams,
    x: &GswCiphertext,
    y: &GswCiphertext,
) -> Result<GswCiphertext, LweError> {
    check_shape(params, x)?;
    check_shape(params, y)?;
    let rows = x
        .rows
        .iter()
        .zip(&y.rows)
        .map(|(r1, r2)| {
            r1.iter()
                .zip(r2)
                .map(|(a, b)| centered(&(a + b), params.modulus()))
                .collect()
        })
        .collect();
    Ok(GswCiphertext {
        rows,
        error_bound: &x.error_bound + &y.error_bound,
        message_bound: &x.message_bound + &y.message_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::round_scaled;
    use crate::lwe_gsw::lwe::{decrypt, encrypt as lwe_encrypt};
    use crate::modarith::seeded_rng;

    fn bi(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn gadget_phase(params: &LweParams, sk: &LweSecretKey, z: &BigInt, row: usize) -> BigInt {
        let col = row / params.digits();
        let g = gadget_entry(params, row, col).unwrap();
        let s_bar = if col == 0 { bi(1) } else { sk.coeffs()[col - 1].clone() };
        centered(&(z * g * s_bar), params.modulus())
    }

    #[test]
    fn zero_noise_rows_are_exact() {
        let p = LweParams::new(4, BigInt::from(10u8).pow(20), 10, 0.0).unwrap();
        let mut rng = seeded_rng(1);
        let sk = LweSecretKey::generate(&p, &mut rng);
        let z = bi(-4568);
        let c = encrypt(&p, &sk, &z, &mut rng).unwrap();
        assert_eq!(c.rows().len(), 100);
        for (i, ph) in phases(&p, &sk, &c).unwrap().into_iter().enumerate() {
            assert_eq!(ph, gadget_phase(&p, &sk, &z, i));
        }
        let zero = encrypt(&p, &sk, &bi(0), &mut rng).unwrap();
        assert!(phases(&p, &sk, &zero).unwrap().iter().all(Zero::is_zero));
    }

    #[test]
    fn noisy_rows_within_bound() {
        let p = LweParams::demo();
        let mut rng = seeded_rng(2);
        let sk = LweSecretKey::generate(&p, &mut rng);
        for _ in 0..5 {
            let z = BigInt::from(rng.gen_range(-100_000i64..100_000));
            let c = encrypt(&p, &sk, &z, &mut rng).unwrap();
            for (i, ph) in phases(&p, &sk, &c).unwrap().into_iter().enumerate() {
                let e = centered(&(ph - gadget_phase(&p, &sk, &z, i)), p.modulus());
                assert!(e.abs() <= p.noise_bound());
            }
        }
    }

    #[test]
    fn product_decodes_near_5_637() {
        let p = LweParams::demo();
        let mut rng = seeded_rng(3);
        let sk = LweSecretKey::generate(&p, &mut rng);
        let zx = round_scaled(1.2345, 1e3);
        let zy = round_scaled(4.5678, 1e3);
        let ct_x = lwe_encrypt(&p, &sk, &zx, &mut rng).unwrap();
        let ct_y = encrypt(&p, &sk, &zy, &mut rng).unwrap();
        let xy = decrypt(&p, &sk, &external_product(&p, &ct_y, &ct_x).unwrap()).unwrap();
        let v = crate::modarith::to_f64(&xy) / 1e6;
        assert!((v - 5.6369).abs() <= 0.05, "{v}");
    }

    #[test]
    fn external_product_identity_annihilator_and_bound() {
        let p = LweParams::demo();
        let mut rng = seeded_rng(4);
        let sk = LweSecretKey::generate(&p, &mut rng);
        let one = encrypt(&p, &sk, &bi(1), &mut rng).unwrap();
        let zero = encrypt(&p, &sk, &bi(0), &mut rng).unwrap();
        for _ in 0..100 {
            let z = BigInt::from(rng.gen_range(-1_000_000i64..1_000_000));
            let ct = lwe_encrypt(&p, &sk, &z, &mut rng).unwrap();
            let r = external_product(&p, &one, &ct).unwrap();
            let e = decrypt(&p, &sk, &r).unwrap() - &z;
            assert!(e.abs() <= *r.error_bound(), "{e} vs {}", r.error_bound());
            let r0 = external_product(&p, &zero, &ct).unwrap();
            assert!(decrypt(&p, &sk, &r0).unwrap().abs() <= *r0.error_bound());
        }
    }

    #[test]
    fn gsw_mul_behaves_like_plain_product() {
        let p = LweParams::demo();
        let mut rng = seeded_rng(5);
        let sk = LweSecretKey::generate(&p, &mut rng);
        let one = encrypt(&p, &sk, &bi(1), &mut rng).unwrap();
        let zeros = encrypt(&p, &sk, &bi(0), &mut rng).unwrap();
        let x = lwe_encrypt(&p, &sk, &bi(1000), &mut rng).unwrap();
        for (a, b) in [(3i64, -7i64), (12, 11), (-5, -9)] {
            let ga = encrypt(&p, &sk, &bi(a), &mut rng).unwrap();
            let gb = encrypt(&p, &sk, &bi(b), &mut rng).unwrap();
            let prod = mul(&p, &ga, &gb).unwrap();
            let r = external_product(&p, &prod, &x).unwrap();
            let e = decrypt(&p, &sk, &r).unwrap() - bi(1000 * a * b);
            assert!(e.abs() <= *r.error_bound());

            // GSW(1) * GSW(b) acts like GSW(b).
            let id = mul(&p, &one, &gb).unwrap();
            let lhs = decrypt(&p, &sk, &external_product(&p, &id, &x).unwrap()).unwrap();
            assert!((lhs - bi(1000 * b)).abs() <= *r.error_bound());

            // (a * b) * a == a * (b * a)
            let expected = bi(1000 * a * b * a);
            let left = mul(&p, &prod, &ga).unwrap();
            let right = mul(&p, &ga, &mul(&p, &gb, &ga).unwrap()).unwrap();
            for g in [&left, &right] {
                let r = external_product(&p, g, &x).unwrap();
                let e = decrypt(&p, &sk, &r).unwrap() - &expected;
                assert!(e.abs() <= *r.error_bound());
            }

            let z = mul(&p, &zeros, &ga).unwrap();
            let r = external_product(&p, &z, &x).unwrap();
            assert!(decrypt(&p, &sk, &r).unwrap().abs() <= *r.error_bound());
        }
    }

    #[test]
    fn gsw_addition() {
        let p = LweParams::demo();
        let mut rng = seeded_rng(6);
        let sk = LweSecretKey::generate(&p, &mut rng);
        let g1 = encrypt(&p, &sk, &bi(-70), &mut rng).unwrap();
        let g2 = encrypt(&p, &sk, &bi(120), &mut rng).unwrap();
        let empty = GswCiphertext::zero(&p);
        let sum = add(&p, &g1, &g2).unwrap();
        assert_eq!(sum, add(&p, &g2, &g1).unwrap());
        assert_eq!(add(&p, &g1, &empty).unwrap().rows(), g1.rows());
        let x = lwe_encrypt(&p, &sk, &bi(10_000), &mut rng).unwrap();
        let r = external_product(&p, &sum, &x).unwrap();
        let e = decrypt(&p, &sk, &r).unwrap() - bi(500_000);
        assert!(e.abs() <= *r.error_bound());
    }

    #[test]
    fn shape_mismatch_rejected() {
        let p = LweParams::demo();
        let small = LweParams::new(2, BigInt::from(10u8).pow(20), 10, 3.2).unwrap();
        let g = GswCiphertext::zero(&small);
        let x = LweCiphertext::zero(&p);
        assert!(matches!(
            external_product(&p, &g, &x),
            Err(LweError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn text_roundtrip() {
        let p = LweParams::new(2, BigInt::from(10u8).pow(6), 10, 3.2).unwrap();
        let mut rng = seeded_rng(7);
        let sk = LweSecretKey::generate(&p, &mut rng);
        let g = encrypt(&p, &sk, &bi(17), &mut rng).unwrap();
        let text = g.to_text();
        assert_eq!(text.lines().count(), 18);
        let back = GswCiphertext::from_text(&p, &text).unwrap();
        assert_eq!(back.rows(), g.rows());
        assert!(GswCiphertext::from_text(&p, "1 2 3\n").is_err());
    }
}
