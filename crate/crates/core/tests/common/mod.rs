#![allow(dead_code)]

use beta_approx::algebraic::{certify_garsia, parse_polynomial, GarsiaCertificate};
use beta_approx::expansion::{BetaContext, DigitString};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;

pub const PREC: u32 = 256;

pub fn certificate(poly: &str) -> GarsiaCertificate {
    let p = parse_polynomial(poly).unwrap();
    certify_garsia(&p, PREC).unwrap().into_certificate().unwrap()
}

pub fn garsia_context(poly: &str) -> BetaContext {
    BetaContext::from_certificate(&certificate(poly)).unwrap()
}

pub fn golden_context() -> BetaContext {
    let five = Float::with_val(PREC, 5u32);
    let phi = (five.sqrt() + 1u32) / 2u32;
    BetaContext::new(&phi, PREC).unwrap()
}

/// `count` points drawn uniformly from the open interval `(0, c)`.
pub fn random_points(ctx: &BetaContext, count: usize, seed: u64) -> Vec<Float> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u: f64 = rng.gen_range(1e-6..1.0 - 1e-6);
            Float::with_val(ctx.precision_bits(), ctx.c() * u)
        })
        .collect()
}

/// Every level-n sum with its digit string, in mask order.
pub fn all_level_sums(ctx: &BetaContext, n: u32) -> Vec<(Float, DigitString)> {
    let prec = ctx.precision_bits();
    let weights: Vec<Float> = (1..=n).map(|i| Float::with_val(prec, ctx.beta_pow(i).recip())).collect();
    (0u64..1 << n)
        .map(|mask| {
            let digits = DigitString::from_mask(mask, n as usize);
            let mut s = Float::new(prec);
            for (d, w) in digits.as_slice().iter().zip(&weights) {
                if *d == 1 {
                    s += w;
                }
            }
            (s, digits)
        })
        .collect()
}

/// Brute-force prefix filter: `0 <= x - s <= c beta^(-n)` up to `tol`, returned sorted.
pub fn brute_prefixes(ctx: &BetaContext, sums: &[(Float, DigitString)], x: &Float, n: u32) -> Vec<String> {
    let prec = ctx.precision_bits();
    let tail = Float::with_val(prec, ctx.c() / ctx.beta_pow(n));
    let tol = Float::with_val(prec, ctx.tolerance() / ctx.beta_pow(n));
    let mut out: Vec<String> = sums
        .iter()
        .filter(|(s, _)| {
            let gap = Float::with_val(prec, x - s);
            gap >= -Float::with_val(prec, &tol) && gap <= Float::with_val(prec, &tail + &tol)
        })
        .map(|(_, d)| d.to_string())
        .collect();
    out.sort();
    out
}

/// Smallest `x - s` over level sums `s <= x`.
pub fn brute_min_gap(ctx: &BetaContext, sums: &[(Float, DigitString)], x: &Float) -> Float {
    let prec = ctx.precision_bits();
    sums.iter()
        .map(|(s, _)| Float::with_val(prec, x - s))
        .filter(|g| !g.is_sign_negative())
        .min_by(|a, b| a.partial_cmp(b).unwrap())
        .unwrap()
}
