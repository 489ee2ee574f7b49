//! Garsia-number certification.
//!
//! A Garsia number here is a real algebraic integer `beta` in `(1, 2)` whose
//! minimal polynomial has norm `±2` and whose other conjugates all lie strictly
//! outside the unit circle. The certificate carries the separation constant
//! `k2 = prod (|gamma_i| - 1)` and the density bound `2 / k2`.

use std::fmt;

use rug::{Float, Integer};
use serde::{Serialize, Serializer};

use super::complex::Complex;
use super::polynomial::IntPolynomial;
use super::roots::{all_roots, RootEnclosure, RootSet};
use crate::error::{Error, Result};
use crate::real::{serde_float, short_string, tolerance};

/// Largest degree handled by the subset-reconstruction irreducibility test.
pub const MAX_CERTIFIED_DEGREE: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RejectionCode {
    NotMonic,
    BadNorm,
    Reducible,
    NoRootInRange,
    SmallConjugate,
}

impl RejectionCode {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectionCode::NotMonic => "NOT_MONIC",
            RejectionCode::BadNorm => "BAD_NORM",
            RejectionCode::Reducible => "REDUCIBLE",
            RejectionCode::NoRootInRange => "NO_ROOT_IN_RANGE",
            RejectionCode::SmallConjugate => "SMALL_CONJUGATE",
        }
    }
}

impl fmt::Display for RejectionCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which Garsia condition failed, and why.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub code: RejectionCode,
    pub detail: String,
}

impl Rejection {
    fn new(code: RejectionCode, detail: impl Into<String>) -> Self {
        Self { code, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GarsiaCertificate {
    #[serde(serialize_with = "display")]
    pub polynomial: IntPolynomial,
    #[serde(with = "serde_float")]
    pub beta: Float,
    #[serde(serialize_with = "roots_only")]
    pub conjugates: RootSet,
    #[serde(with = "serde_float")]
    pub k2: Float,
    #[serde(with = "serde_float")]
    pub density_bound: Float,
    pub precision_bits: u32,
}

fn display<S: Serializer, T: fmt::Display>(value: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(value)
}

fn roots_only<S: Serializer>(value: &RootSet, s: S) -> std::result::Result<S::Ok, S::Error> {
    value.roots.serialize(s)
}

/// Outcome of [`certify_garsia`].
#[derive(Clone, Debug, PartialEq)]
pub enum Certification {
    Garsia(GarsiaCertificate),
    Rejected(Rejection),
}

impl Certification {
    pub fn certificate(&self) -> Option<&GarsiaCertificate> {
        match self {
            Certification::Garsia(c) => Some(c),
            Certification::Rejected(_) => None,
        }
    }

    pub fn rejection(&self) -> Option<&Rejection> {
        match self {
            Certification::Garsia(_) => None,
            Certification::Rejected(r) => Some(r),
        }
    }

    pub fn into_certificate(self) -> std::result::Result<GarsiaCertificate, Rejection> {
        match self {
            Certification::Garsia(c) => Ok(c),
            Certification::Rejected(r) => Err(r),
        }
    }
}

/// Checks, in order: monic, `|p(0)| = 2`, irreducibility, a unique real root
/// in the open interval `(1, 2)`, and every other root of certified modulus
/// above one.
pub fn certify_garsia(p: &IntPolynomial, precision_bits: u32) -> Result<Certification> {
    use RejectionCode::*;
    let reject = |code, detail: String| Ok(Certification::Rejected(Rejection::new(code, detail)));

    let lead = p.coefficients().last().expect("degree >= 1");
    if *lead != 1 {
        return reject(NotMonic, format!("leading coefficient {lead}"));
    }
    let constant = p.constant_term();
    if Integer::from(constant.abs_ref()) != 2 {
        return reject(BadNorm, format!("constant term {constant}, norm must be ±2"));
    }
    if p.degree() > MAX_CERTIFIED_DEGREE {
        return Err(Error::InvalidArgument(format!(
            "degree {} exceeds the supported maximum {MAX_CERTIFIED_DEGREE}",
            p.degree()
        )));
    }
    if p.degree() >= 2 {
        for candidate in [1, -1, 2, -2] {
            if p.eval_integer(&Integer::from(candidate)) == 0 {
                return reject(Reducible, format!("rational root {candidate}"));
            }
        }
        if !p.is_squarefree() {
            return reject(Reducible, "repeated factor".into());
        }
    }

    let roots = all_roots(p, precision_bits)?;
    if let Some(factor) = find_integer_factor(p, &roots) {
        return reject(Reducible, format!("factor {factor}"));
    }

    let wp = roots.roots[0].re.prec();
    let tau = tolerance(precision_bits);
    let touching: Vec<usize> = (0..roots.len())
        .filter(|&i| {
            let r = &roots.roots[i];
            r.is_real()
                && Float::with_val(wp, &r.re + &r.radius) >= 1u32
                && Float::with_val(wp, &r.re - &r.radius) <= 2u32
        })
        .collect();
    let beta_index = match touching.as_slice() {
        [only] => *only,
        [] => return reject(NoRootInRange, "no real root in (1, 2)".into()),
        many => return reject(NoRootInRange, format!("{} real roots in [1, 2]", many.len())),
    };
    let beta_root = &roots.roots[beta_index];
    let low = Float::with_val(wp, &beta_root.re - &beta_root.radius);
    let high = Float::with_val(wp, &beta_root.re + &beta_root.radius);
    if low <= Float::with_val(wp, 1u32 + &tau) || high >= Float::with_val(wp, 2u32 - &tau) {
        return reject(
            NoRootInRange,
            format!("real root {} is not certified inside the open interval (1, 2)", short_string(&beta_root.re)),
        );
    }

    let conjugates: Vec<RootEnclosure> =
        roots.iter().enumerate().filter(|(i, _)| *i != beta_index).map(|(_, r)| r.clone()).collect();
    let rounding = Float::with_val(wp, Float::i_exp(1, -(wp as i32) + 8));
    let mut k2 = Float::with_val(wp, 1u32);
    for gamma in &conjugates {
        let modulus = gamma.modulus();
        let certified_low = Float::with_val(wp, &modulus - &gamma.radius) - &rounding;
        if certified_low <= 1u32 {
            return reject(
                SmallConjugate,
                format!(
                    "conjugate {} + {}i has modulus {} not certified above 1",
                    short_string(&gamma.re),
                    short_string(&gamma.im),
                    short_string(&modulus)
                ),
            );
        }
        k2 *= modulus - 1u32;
    }
    let density_bound = Float::with_val(wp, 2u32) / &k2;

    Ok(Certification::Garsia(GarsiaCertificate {
        polynomial: p.clone(),
        beta: Float::with_val(precision_bits, &beta_root.re),
        conjugates: RootSet { roots: conjugates, precision_bits },
        k2: Float::with_val(precision_bits, &k2),
        density_bound: Float::with_val(precision_bits, &density_bound),
        precision_bits,
    }))
}

/// Searches conjugation-closed subsets of roots for a monic integer factor of
/// degree at most `d/2` that divides `p` exactly.
fn find_integer_factor(p: &IntPolynomial, roots: &RootSet) -> Option<IntPolynomial> {
    let degree = p.degree();
    if degree < 2 {
        return None;
    }
    // Real roots are single units; complex pairs count once (upper half-plane member).
    let units: Vec<Vec<&RootEnclosure>> = roots
        .iter()
        .enumerate()
        .filter(|(_, r)| r.is_real() || r.im > 0u32)
        .map(|(i, r)| {
            if r.is_real() {
                vec![r]
            } else {
                let partner = roots
                    .iter()
                    .enumerate()
                    .find(|(j, q)| *j != i && q.re == r.re && q.im == Float::with_val(r.im.prec(), -&r.im))
                    .map(|(_, q)| q)
                    .expect("symmetrized roots pair up");
                vec![r, partner]
            }
        })
        .collect();
    let prec = roots.roots[0].re.prec();
    let slack = Float::with_val(prec, Float::i_exp(1, -20));
    for mask in 1u64..(1u64 << units.len()) {
        let chosen: Vec<&RootEnclosure> =
            (0..units.len()).filter(|k| mask >> k & 1 == 1).flat_map(|k| units[k].iter().copied()).collect();
        if chosen.len() > degree / 2 {
            continue;
        }
        // prod (x - r), ascending complex coefficients.
        let mut coeffs = vec![Complex::real(prec, &Float::with_val(prec, 1u32))];
        for r in &chosen {
            let root = Complex::from_parts(r.re.clone(), r.im.clone());
            let mut next = vec![Complex::zero(prec); coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k + 1] = next[k + 1].add(c);
                next[k] = next[k].sub(&c.mul(&root));
            }
            coeffs = next;
        }
        let rounded: Option<Vec<Integer>> = coeffs
            .iter()
            .map(|c| {
                let nearest = Float::with_val(prec, c.re.round_ref());
                let off = Float::with_val(prec, &c.re - &nearest).abs();
                (off < slack && Float::with_val(prec, c.im.abs_ref()) < slack)
                    .then(|| nearest.to_integer())
                    .flatten()
            })
            .collect();
        let Some(candidate) = rounded else { continue };
        if p.divide_exact(&candidate).is_some() {
            return IntPolynomial::from_coefficients(candidate).ok();
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebraic::parse_polynomial;

    fn certify(text: &str) -> Certification {
        certify_garsia(&parse_polynomial(text).unwrap(), 256).unwrap()
    }

    fn code(text: &str) -> RejectionCode {
        certify(text).rejection().expect("rejected").code
    }

    #[test]
    fn sqrt_two_is_garsia() {
        let cert = certify("x^2-2").into_certificate().unwrap();
        let sqrt2 = Float::with_val(256, 2u32).sqrt();
        let k2_err = Float::with_val(256, &cert.k2 - (sqrt2.clone() - 1u32)).abs();
        assert!(k2_err < Float::with_val(256, Float::i_exp(1, -200)));
        assert!((cert.density_bound.to_f64() - 4.828_427_124_746_19).abs() < 1e-12);
        assert_eq!(cert.conjugates.len(), 1);
    }

    #[test]
    fn cubic_example() {
        let cert = certify("x^3-2x-2").into_certificate().unwrap();
        assert!((cert.beta.to_f64() - 1.769_292_354_238_631_4).abs() < 1e-14);
        // Frozen from an independent mpmath evaluation of (sqrt(2/beta) - 1)^2.
        assert!((cert.k2.to_f64() - 0.003_994_311_021_075_735).abs() < 1e-15);
        assert!((cert.density_bound.to_f64() - 500.712_135_196_063_6).abs() < 1e-9);
    }

    #[test]
    fn rejections() {
        assert_eq!(code("x^2-x-1"), RejectionCode::BadNorm);
        assert_eq!(code("x^2-3x+2"), RejectionCode::Reducible);
        assert_eq!(code("x^3-3x-2"), RejectionCode::Reducible);
        assert_eq!(code("x^3+x^2-2"), RejectionCode::Reducible);
        assert_eq!(code("x-2"), RejectionCode::NoRootInRange);
        assert_eq!(code("x^2+2"), RejectionCode::NoRootInRange);
        assert_eq!(code("x^3+2x^2-2x-2"), RejectionCode::SmallConjugate);
        assert_eq!(code("x^4-2x^3+x^2-2"), RejectionCode::SmallConjugate);
    }

    #[test]
    fn factor_without_rational_roots_is_found() {
        // (x^2 - 2)(x^2 + x + 1)
        assert_eq!(code("x^4+x^3-x^2-2x-2"), RejectionCode::Reducible);
    }

    #[test]
    fn rejection_codes_serialize() {
        let json = serde_json::to_string(&RejectionCode::NoRootInRange).unwrap();
        assert_eq!(json, "\"NO_ROOT_IN_RANGE\"");
    }

    #[test]
    fn certificate_json_shape() {
        let cert = certify("x^2-2").into_certificate().unwrap();
        let v = serde_json::to_value(&cert).unwrap();
        assert_eq!(v["polynomial"], "x^2-2");
        assert_eq!(v["conjugates"].as_array().unwrap().len(), 1);
        assert!(v["beta"].as_str().unwrap().starts_with("1.41421356"));
    }
}
