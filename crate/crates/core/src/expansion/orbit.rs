use rug::{Assign, Float};
use serde::Serialize;

use super::context::BetaContext;
use super::digits::DigitString;
use crate::error::{Error, Result};
use crate::real::serde_float;

/// `T_0(y) = beta y` or `T_1(y) = beta y - 1`.
pub fn orbit_step(y: &Float, digit: u8, ctx: &BetaContext) -> Float {
    let mut out = Float::with_val(ctx.precision_bits, y * &ctx.beta);
    if digit == 1 {
        out -= 1u32;
    }
    out
}

/// Result of testing a digit string against a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrefixCheck {
    pub is_prefix: bool,
    /// `x - sum e_i beta^(-i)`; may be negative when the test fails.
    #[serde(with = "serde_float")]
    pub gap: Float,
    /// Final orbit value `beta^n * gap`.
    #[serde(with = "serde_float")]
    pub final_value: Float,
}

/// Tests whether `digits` is an n-prefix of `x`: `0 <= x - sum <= c beta^(-n)`,
/// with both bounds relaxed by the boundary tolerance.
pub fn is_prefix(x: &Float, digits: &DigitString, ctx: &BetaContext) -> Result<PrefixCheck> {
    if digits.is_empty() {
        return Err(Error::InvalidArgument("digit string must be non-empty".into()));
    }
    let mut y = ctx.start(x)?;
    for &d in digits.as_slice() {
        y = orbit_step(&y, d, ctx);
    }
    let is_prefix = y >= ctx.neg_tau && y <= ctx.c_plus_tau;
    let gap = Float::with_val(ctx.precision_bits, &y / ctx.beta_pow(digits.len() as u32));
    Ok(PrefixCheck { is_prefix, gap, final_value: y })
}

/// One n-prefix of `x` with its final orbit value and gap.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrefixEntry {
    pub digits: DigitString,
    #[serde(with = "serde_float")]
    pub final_value: Float,
    #[serde(with = "serde_float")]
    pub gap: Float,
}

/// The n-prefixes of `x`, in lexicographic order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrefixSet {
    #[serde(with = "serde_float")]
    pub x: Float,
    pub n: u32,
    pub count: u64,
    pub entries: Vec<PrefixEntry>,
}

/// Depth-first walk over admissible digit choices, one preallocated value per depth.
pub(crate) struct Walk<'a> {
    pub ctx: &'a BetaContext,
    pub values: Vec<Float>,
    pub digits: Vec<u8>,
    nodes: u64,
}

impl<'a> Walk<'a> {
    pub fn new(ctx: &'a BetaContext, x: Float, depth: u32) -> Self {
        let mut values = vec![Float::new(ctx.precision_bits); depth as usize + 1];
        values[0] = x;
        Self { ctx, values, digits: vec![0; depth as usize], nodes: 0 }
    }

    /// Writes the child of `values[k]` under `digit` into `values[k + 1]`;
    /// false when the child leaves `[0, c]` by more than the tolerance.
    pub fn step(&mut self, k: usize, digit: u8) -> Result<bool> {
        let ctx = self.ctx;
        let (head, tail) = self.values.split_at_mut(k + 1);
        let child = &mut tail[0];
        child.assign(&head[k] * &ctx.beta);
        if digit == 1 {
            *child -= 1u32;
            if *child < ctx.neg_tau {
                return Ok(false);
            }
            if child.is_sign_negative() {
                child.assign(0u32);
            }
        } else {
            if *child > ctx.c_plus_tau {
                return Ok(false);
            }
            if *child > ctx.c {
                child.assign(&ctx.c);
            }
        }
        self.digits[k] = digit;
        self.nodes += 1;
        if self.nodes > ctx.node_budget() {
            return Err(Error::BudgetExceeded(ctx.node_budget()));
        }
        Ok(true)
    }

    pub fn path(&self, k: usize) -> DigitString {
        DigitString::from_digits(self.digits[..k].to_vec())
    }
}

/// Lists every n-prefix of `x` (T_0 branch first, so the output is sorted).
pub fn enumerate_prefixes(x: &Float, n: u32, ctx: &BetaContext) -> Result<PrefixSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let start = ctx.start(x)?;
    let mut walk = Walk::new(ctx, start, n);
    let scale = ctx.beta_pow(n);
    let mut entries = Vec::new();
    visit_all(&mut walk, 0, n as usize, &mut |w: &Walk| {
        let y = w.values[n as usize].clone();
        let gap = Float::with_val(ctx.precision_bits, &y / &scale);
        entries.push(PrefixEntry { digits: w.path(n as usize), final_value: y, gap });
    })?;
    Ok(PrefixSet { x: Float::with_val(ctx.precision_bits, x), n, count: entries.len() as u64, entries })
}

/// Number of n-prefixes of `x`.
pub fn count_prefixes(x: &Float, n: u32, ctx: &BetaContext) -> Result<u64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let start = ctx.start(x)?;
    let mut walk = Walk::new(ctx, start, n);
    let mut count = 0u64;
    visit_all(&mut walk, 0, n as usize, &mut |_: &Walk| count += 1)?;
    Ok(count)
}

fn visit_all(walk: &mut Walk, k: usize, n: usize, leaf: &mut dyn FnMut(&Walk)) -> Result<()> {
    if k == n {
        leaf(walk);
        return Ok(());
    }
    for digit in [0, 1] {
        if walk.step(k, digit)? {
            visit_all(walk, k + 1, n, leaf)?;
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExtremalMode {
    Greedy,
    Lazy,
}

/// Greedy takes digit 1 whenever `T_1(y) >= 0`; lazy takes 0 whenever `T_0(y) <= c`.
pub fn extremal_expansion(x: &Float, n: u32, mode: ExtremalMode, ctx: &BetaContext) -> Result<DigitString> {
    let mut y = ctx.start(x)?;
    let mut digits = DigitString::new();
    for _ in 0..n {
        let one = orbit_step(&y, 1, ctx);
        let zero = orbit_step(&y, 0, ctx);
        let digit = match mode {
            ExtremalMode::Greedy if one >= ctx.neg_tau => 1,
            ExtremalMode::Greedy => 0,
            ExtremalMode::Lazy if zero <= ctx.c_plus_tau => 0,
            ExtremalMode::Lazy => 1,
        };
        digits.push(digit);
        y = ctx.clamp(if digit == 1 { one } else { zero });
    }
    Ok(digits)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum UniquenessVerdict {
    UniqueToDepth { depth: u32 },
    /// Both digits are admissible at this (1-based) position.
    BranchesAt { branch_depth: u32 },
}

/// Follows the forced orbit of `x` for `n` steps, stopping at the first choice.
pub fn unique_to_depth(x: &Float, n: u32, ctx: &BetaContext) -> Result<UniquenessVerdict> {
    let mut y = ctx.start(x)?;
    for k in 1..=n {
        let zero = orbit_step(&y, 0, ctx);
        let one = orbit_step(&y, 1, ctx);
        let zero_ok = zero <= ctx.c_plus_tau;
        let one_ok = one >= ctx.neg_tau;
        y = match (zero_ok, one_ok) {
            (true, true) => return Ok(UniquenessVerdict::BranchesAt { branch_depth: k }),
            (true, false) => ctx.clamp(zero),
            (false, true) => ctx.clamp(one),
            (false, false) => unreachable!("every point of [0, c] has an admissible digit"),
        };
    }
    Ok(UniquenessVerdict::UniqueToDepth { depth: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::parse_decimal;

    fn f(text: &str) -> Float {
        parse_decimal(text, 256).unwrap()
    }

    fn brute_force(x: &Float, n: u32, ctx: &BetaContext) -> Vec<(DigitString, Float)> {
        let mut out = Vec::new();
        for mask in 0u64..(1 << n) {
            let digits: DigitString = DigitString::from_digits((0..n).map(|i| (mask >> (n - 1 - i) & 1) as u8).collect());
            let mut sum = Float::new(256);
            let mut w = Float::with_val(256, 1u32);
            for &d in digits.as_slice() {
                w /= ctx.beta();
                if d == 1 {
                    sum += &w;
                }
            }
            let gap = Float::with_val(256, x - &sum);
            let upper = Float::with_val(256, ctx.c() / ctx.beta_pow(n));
            if gap >= 0u32 && gap <= upper {
                out.push((digits, gap));
            }
        }
        out
    }

    #[test]
    fn orbit_step_examples() {
        let ctx = BetaContext::sqrt2();
        assert_eq!(orbit_step(&Float::new(256), 0, &ctx), 0u32);
        let back = orbit_step(ctx.c(), 1, &ctx);
        assert!(Float::with_val(256, &back - ctx.c()).abs() < Float::with_val(256, Float::i_exp(1, -240)));
        let ctx15 = BetaContext::from_decimal("1.5", 256).unwrap();
        assert_eq!(orbit_step(&f("1"), 1, &ctx15), 0.5);
    }

    #[test]
    fn is_prefix_examples() {
        let ctx = BetaContext::from_decimal("1.5", 256).unwrap();
        assert!(!is_prefix(&f("0.5"), &"1".parse().unwrap(), &ctx).unwrap().is_prefix);
        let check = is_prefix(&f("0.5"), &"0".parse().unwrap(), &ctx).unwrap();
        assert!(check.is_prefix);
        assert_eq!(check.gap, 0.5);
        let root2 = BetaContext::sqrt2();
        let c = root2.c().clone();
        let check = is_prefix(&c, &"111".parse().unwrap(), &root2).unwrap();
        assert!(check.is_prefix);
        let expected = Float::with_val(256, &c / root2.beta_pow(3));
        assert!(Float::with_val(256, &check.gap - &expected).abs() < 1e-60);
        assert!(matches!(is_prefix(&f("2.5"), &"1".parse().unwrap(), &ctx), Err(Error::Domain { .. })));
    }

    #[test]
    fn enumerate_examples() {
        let ctx = BetaContext::sqrt2();
        let zero = enumerate_prefixes(&Float::new(256), 5, &ctx).unwrap();
        assert_eq!(zero.count, 1);
        assert_eq!(zero.entries[0].digits.to_string(), "00000");
        for beta in ["1.1", "1.5", "1.9"] {
            let ctx = BetaContext::from_decimal(beta, 256).unwrap();
            let x = Float::with_val(256, ctx.beta().recip_ref());
            let set = enumerate_prefixes(&x, 1, &ctx).unwrap();
            let words: Vec<String> = set.entries.iter().map(|e| e.digits.to_string()).collect();
            assert_eq!(words, ["0", "1"]);
        }
        assert_eq!(count_prefixes(&Float::new(256), 30, &ctx).unwrap(), 1);
        assert_eq!(count_prefixes(ctx.c(), 30, &ctx).unwrap(), 1);
    }

    #[test]
    fn enumerate_matches_brute_force_at_frozen_point() {
        let ctx = BetaContext::sqrt2();
        let x = f("0.7");
        // Counts frozen from an exhaustive filter of all 2^n words.
        assert_eq!(count_prefixes(&x, 10, &ctx).unwrap(), 38);
        assert_eq!(count_prefixes(&x, 12, &ctx).unwrap(), 76);
        for n in [10, 12] {
            let set = enumerate_prefixes(&x, n, &ctx).unwrap();
            let oracle = brute_force(&x, n, &ctx);
            let ours: Vec<&DigitString> = set.entries.iter().map(|e| &e.digits).collect();
            let theirs: Vec<&DigitString> = oracle.iter().map(|(d, _)| d).collect();
            assert_eq!(ours, theirs);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let ctx = BetaContext::sqrt2().with_node_budget(100);
        assert_eq!(count_prefixes(&f("0.7"), 20, &ctx), Err(Error::BudgetExceeded(100)));
    }

    #[test]
    fn extremal_examples() {
        let ctx = BetaContext::from_decimal("1.5", 256).unwrap();
        assert_eq!(extremal_expansion(&f("0.7"), 3, ExtremalMode::Greedy, &ctx).unwrap().to_string(), "100");
        let greedy = "100".parse().unwrap();
        let y = is_prefix(&f("0.7"), &greedy, &ctx).unwrap().final_value;
        assert!((y.to_f64() - 0.1125).abs() < 1e-15);
        assert_eq!(extremal_expansion(&Float::new(256), 8, ExtremalMode::Greedy, &ctx).unwrap(), DigitString::zeros(8));
        assert_eq!(extremal_expansion(ctx.c(), 8, ExtremalMode::Lazy, &ctx).unwrap(), DigitString::ones(8));
    }

    #[test]
    fn uniqueness_examples() {
        let ctx = BetaContext::from_decimal("1.5", 256).unwrap();
        assert_eq!(unique_to_depth(&Float::new(256), 64, &ctx).unwrap(), UniquenessVerdict::UniqueToDepth { depth: 64 });
        assert_eq!(unique_to_depth(ctx.c(), 64, &ctx).unwrap(), UniquenessVerdict::UniqueToDepth { depth: 64 });
        assert_eq!(unique_to_depth(&f("0.7"), 64, &ctx).unwrap(), UniquenessVerdict::BranchesAt { branch_depth: 1 });
        let json = serde_json::to_string(&UniquenessVerdict::BranchesAt { branch_depth: 1 }).unwrap();
        assert_eq!(json, r#"{"status":"BRANCHES_AT","branch_depth":1}"#);
    }
}
