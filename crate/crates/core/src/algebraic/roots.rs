//! Simultaneous root isolation with certified enclosing disks.
//!
//! Roots are approximated with the Aberth–Ehrlich iteration, first at a cheap
//! precision and then at the working precision. Each approximation `z_i` is
//! then given the radius `d * |p(z_i) / prod_{j != i} (z_i - z_j)|`: the union of
//! these disks holds every root, and each connected component holds as many
//! roots as disks. When the disks are pairwise disjoint every disk therefore
//! holds exactly one root.
//!
//! Repeated roots are split off first by a squarefree decomposition; a root of
//! multiplicity `k` is listed `k` times with the same disk.

use rug::Float;
use serde::Serialize;

use super::complex::Complex;
use super::polynomial::IntPolynomial;
use crate::error::{Error, Result};
use crate::real::serde_float;

const COARSE_PRECISION: u32 = 64;
const MAX_ITERATIONS: usize = 2000;

/// One root: a disk `|z - (re + i im)| <= radius` known to hold exactly one distinct root.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootEnclosure {
    #[serde(with = "serde_float")]
    pub re: Float,
    #[serde(with = "serde_float")]
    pub im: Float,
    #[serde(with = "serde_float")]
    pub radius: Float,
}

impl RootEnclosure {
    /// Real roots are stored with an exactly zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn modulus(&self) -> Float {
        Float::with_val(self.re.prec(), self.re.hypot_ref(&self.im))
    }

    fn center(&self) -> Complex {
        Complex::from_parts(self.re.clone(), self.im.clone())
    }
}

/// All roots of a polynomial, with multiplicity, at a certified accuracy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootSet {
    pub roots: Vec<RootEnclosure>,
    pub precision_bits: u32,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, RootEnclosure> {
        self.roots.iter()
    }
}

fn working_precision(precision_bits: u32, degree: usize) -> u32 {
    precision_bits + 64 + 2 * (usize::BITS - degree.leading_zeros())
}

/// Horner evaluation of `p` and `p'` at `z`.
fn horner(coeffs: &[Float], z: &Complex) -> (Complex, Complex) {
    let prec = z.prec();
    let mut value = Complex::zero(prec);
    let mut deriv = Complex::zero(prec);
    for c in coeffs.iter().rev() {
        deriv = deriv.mul(z).add(&value);
        value = value.mul(z);
        value.re += c;
    }
    (value, deriv)
}

fn initial_guesses(coeffs: &[Float], prec: u32) -> Vec<Complex> {
    let d = coeffs.len() - 1;
    // Fujiwara-style bound on root moduli.
    let mut bound: f64 = 0.0;
    for k in 1..=d {
        let a = coeffs[d - k].to_f64().abs();
        if a > 0.0 {
            bound = bound.max(a.powf(1.0 / k as f64));
        }
    }
    let radius = Float::with_val(prec, bound.max(0.5));
    let two_pi = Float::with_val(prec, rug::float::Constant::Pi) * 2u32;
    (0..d)
        .map(|k| {
            let angle = Float::with_val(prec, &two_pi * k as u32) / d as u32 + 0.4f64;
            let (sin, cos) = angle.sin_cos(Float::new(prec));
            Complex::from_parts(cos * &radius, sin * &radius)
        })
        .collect()
}

/// Aberth–Ehrlich iteration until relative corrections fall below `2^-target_bits`.
fn aberth(coeffs: &[Float], mut z: Vec<Complex>, target_bits: u32) -> (Vec<Complex>, bool) {
    let prec = z[0].prec();
    let threshold = Float::with_val(prec, Float::i_exp(1, -(target_bits as i32)));
    let mut settled_rounds = 0;
    for _ in 0..MAX_ITERATIONS {
        let mut largest = Float::new(prec);
        for i in 0..z.len() {
            let (value, deriv) = horner(coeffs, &z[i]);
            if value.re.is_zero() && value.im.is_zero() {
                continue;
            }
            let Some(ratio) = value.div(&deriv) else {
                // Stationary point: nudge and retry on the next sweep.
                z[i].re += Float::with_val(prec, Float::i_exp(1, -20));
                largest = Float::with_val(prec, 1u32);
                continue;
            };
            let mut repulsion = Complex::zero(prec);
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    if let Some(r) = z[i].sub(zj).recip() {
                        repulsion = repulsion.add(&r);
                    }
                }
            }
            let mut denom = ratio.mul(&repulsion);
            denom.re = Float::with_val(prec, 1u32) - &denom.re;
            denom.im = Float::with_val(prec, -&denom.im);
            let step = ratio.div(&denom).unwrap_or(ratio);
            let scale = Float::with_val(prec, 1u32) + z[i].abs();
            let rel = step.abs() / scale;
            if rel > largest {
                largest = rel;
            }
            z[i] = z[i].sub(&step);
        }
        if largest < threshold {
            settled_rounds += 1;
            if settled_rounds >= 2 {
                return (z, true);
            }
        } else {
            settled_rounds = 0;
        }
    }
    (z, false)
}

/// Certified inclusion radius for each approximation.
fn inclusion_radii(coeffs: &[Float], z: &[Complex]) -> Option<Vec<Float>> {
    let prec = z[0].prec();
    let d = z.len();
    let unit = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 2));
    z.iter()
        .enumerate()
        .map(|(i, zi)| {
            let (value, _) = horner(coeffs, zi);
            // Rounding error bound for Horner: (2d + 2) u sum |a_k| |z|^k.
            let modulus = zi.abs();
            let mut magnitude = Float::new(prec);
            for c in coeffs.iter().rev() {
                magnitude *= &modulus;
                magnitude += Float::with_val(prec, c.abs_ref());
            }
            let slack = magnitude * &unit * (2 * d as u32 + 2);
            let mut denom = Complex::real(prec, &Float::with_val(prec, 1u32));
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    denom = denom.mul(&zi.sub(zj));
                }
            }
            let den_abs = denom.abs();
            if den_abs.is_zero() {
                return None;
            }
            let weierstrass = (value.abs() + slack) / den_abs;
            let inflate = Float::with_val(prec, 1u32) + Float::with_val(prec, Float::i_exp(1, -30));
            Some(weierstrass * d as u32 * inflate + &unit * (Float::with_val(prec, 1u32) + modulus))
        })
        .collect()
}

fn disjoint(roots: &[RootEnclosure]) -> bool {
    for (i, a) in roots.iter().enumerate() {
        for b in &roots[i + 1..] {
            let gap = a.center().sub(&b.center()).abs();
            if gap <= Float::with_val(gap.prec(), &a.radius + &b.radius) {
                return false;
            }
        }
    }
    true
}

/// Snaps real roots onto the axis and makes complex pairs exact conjugates,
/// enlarging radii by the distance moved.
fn symmetrize(mut roots: Vec<RootEnclosure>) -> Option<Vec<RootEnclosure>> {
    for r in roots.iter_mut() {
        let offset = Float::with_val(r.im.prec(), r.im.abs_ref());
        if offset <= r.radius {
            r.radius += offset;
            r.im = Float::new(r.im.prec());
        }
    }
    let (upper, lower): (Vec<usize>, Vec<usize>) =
        (0..roots.len()).filter(|&i| !roots[i].is_real()).partition(|&i| roots[i].im > 0u32);
    if upper.len() != lower.len() {
        return None;
    }
    let mut taken = vec![false; lower.len()];
    for &u in &upper {
        let target = roots[u].center().conj();
        let (slot, &l) = lower
            .iter()
            .enumerate()
            .filter(|(k, _)| !taken[*k])
            .min_by(|(_, &a), (_, &b)| {
                let da = roots[a].center().sub(&target).abs();
                let db = roots[b].center().sub(&target).abs();
                da.partial_cmp(&db).unwrap()
            })?;
        taken[slot] = true;
        let prec = roots[u].re.prec();
        let moved = roots[l].center().sub(&target).abs() / 2u32;
        let mid = roots[u].center().add(&roots[l].center().conj());
        let re = Float::with_val(prec, &mid.re / 2u32);
        let im = Float::with_val(prec, &mid.im / 2u32);
        let radius = Float::with_val(prec, roots[u].radius.max_ref(&roots[l].radius)) + moved;
        roots[u] = RootEnclosure { re: re.clone(), im: im.clone(), radius: radius.clone() };
        roots[l] = RootEnclosure { re, im: -im, radius };
    }
    Some(roots)
}

/// All complex roots of `p`, repeated by multiplicity, each with a certified
/// error radius at most `2^(-precision_bits/2)`.
pub fn all_roots(p: &IntPolynomial, precision_bits: u32) -> Result<RootSet> {
    if precision_bits < 16 {
        return Err(Error::InvalidArgument("precision must be at least 16 bits".into()));
    }
    let wp = working_precision(precision_bits, p.degree());
    let mut distinct = Vec::new();
    let mut multiplicities = Vec::new();
    for (factor, multiplicity) in p.squarefree_decomposition() {
        for root in squarefree_roots(&factor, precision_bits, wp)? {
            distinct.push(root);
            multiplicities.push(multiplicity);
        }
    }
    if !disjoint(&distinct) {
        return Err(Error::PrecisionUnreachable(precision_bits));
    }
    let limit = Float::with_val(wp, Float::i_exp(1, -((precision_bits / 2) as i32)));
    if distinct.iter().any(|r| r.radius > limit) {
        return Err(Error::PrecisionUnreachable(precision_bits));
    }
    let mut roots: Vec<RootEnclosure> = distinct
        .into_iter()
        .zip(multiplicities)
        .flat_map(|(r, m)| std::iter::repeat_n(r, m))
        .collect();
    roots.sort_by(|a, b| {
        b.is_real()
            .cmp(&a.is_real())
            .then_with(|| b.re.partial_cmp(&a.re).unwrap())
            .then_with(|| b.im.partial_cmp(&a.im).unwrap())
    });
    Ok(RootSet { roots, precision_bits })
}

fn squarefree_roots(p: &IntPolynomial, precision_bits: u32, wp: u32) -> Result<Vec<RootEnclosure>> {
    let coeffs: Vec<Float> = p.coefficients().iter().map(|c| Float::with_val(wp, c)).collect();
    if p.degree() == 1 {
        let root = Float::with_val(wp, -&coeffs[0]);
        return Ok(vec![RootEnclosure { re: root, im: Float::new(wp), radius: Float::new(wp) }]);
    }
    let coarse: Vec<Float> = coeffs.iter().map(|c| Float::with_val(COARSE_PRECISION, c)).collect();
    let (rough, _) = aberth(&coarse, initial_guesses(&coarse, COARSE_PRECISION), 40);
    let start = rough
        .into_iter()
        .map(|z| Complex::from_parts(Float::with_val(wp, &z.re), Float::with_val(wp, &z.im)))
        .collect();
    let (z, converged) = aberth(&coeffs, start, wp - 8);
    if !converged {
        return Err(Error::PrecisionUnreachable(precision_bits));
    }
    let radii = inclusion_radii(&coeffs, &z).ok_or(Error::PrecisionUnreachable(precision_bits))?;
    let raw: Vec<RootEnclosure> =
        z.into_iter().zip(radii).map(|(c, radius)| RootEnclosure { re: c.re, im: c.im, radius }).collect();
    if !disjoint(&raw) {
        return Err(Error::PrecisionUnreachable(precision_bits));
    }
    symmetrize(raw).ok_or(Error::PrecisionUnreachable(precision_bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebraic::parse_polynomial;

    fn close(a: &Float, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() < tol
    }

    #[test]
    fn sqrt_two_pair() {
        let roots = all_roots(&parse_polynomial("x^2-2").unwrap(), 128).unwrap();
        assert_eq!(roots.len(), 2);
        assert!(roots.iter().all(RootEnclosure::is_real));
        let s = Float::with_val(200, 2u32).sqrt();
        let err = Float::with_val(200, &roots.roots[0].re - &s).abs();
        assert!(err < Float::with_val(200, Float::i_exp(1, -120)));
        assert!(close(&roots.roots[1].re, -std::f64::consts::SQRT_2, 1e-15));
    }

    #[test]
    fn cubic_with_complex_pair() {
        let roots = all_roots(&parse_polynomial("x^3-2x-2").unwrap(), 256).unwrap();
        let r = &roots.roots;
        assert!(r[0].is_real() && close(&r[0].re, 1.769_292_354_238_631_4, 1e-14));
        assert!(close(&r[1].re, -0.884_646_177_119_315_7, 1e-14));
        assert!(close(&r[1].im, 0.589_742_805_022_205_8, 1e-14));
        assert_eq!(r[1].re, r[2].re);
        assert_eq!(r[1].im, Float::with_val(r[2].im.prec(), -&r[2].im));
    }

    #[test]
    fn repeated_roots_keep_multiplicity() {
        let roots = all_roots(&parse_polynomial("x^3-3x-2").unwrap(), 128).unwrap();
        let re: Vec<f64> = roots.iter().map(|r| r.re.to_f64()).collect();
        assert_eq!(re, vec![2.0, -1.0, -1.0]);
        assert!(roots.iter().all(|r| r.radius.is_zero()));
    }

    #[test]
    fn linear_is_exact() {
        let roots = all_roots(&parse_polynomial("x-2").unwrap(), 64).unwrap();
        assert_eq!(roots.roots[0].re, 2u32);
        assert!(roots.roots[0].radius.is_zero());
    }

    #[test]
    fn clustered_repeated_roots() {
        // (x^2-2)^2 (x-1)
        let p = parse_polynomial("x^5-x^4-4x^3+4x^2+4x-4").unwrap();
        let roots = all_roots(&p, 256).unwrap();
        assert_eq!(roots.len(), 5);
        assert!(close(&roots.roots[0].re, std::f64::consts::SQRT_2, 1e-15));
        assert_eq!(roots.roots[0], roots.roots[1]);
    }
}
