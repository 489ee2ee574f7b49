use rug::{Float, Integer};
use serde::Serialize;

use super::psi::{decay_constant, psi_eval, PsiSpec};
use crate::error::{Error, Result};
use crate::expansion::{
    extremal_expansion, is_prefix, min_gaps_in_range, orbit_step, BetaContext, DigitString, ExtremalMode,
};
use crate::real::serde_float;

/// Levels searched per tree walk while looking for the next milestone.
const SEARCH_WINDOW: u32 = 8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Milestone {
    pub depth: u32,
    #[serde(with = "serde_float")]
    pub gap: Float,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionResult {
    /// A prefix of `x` of length equal to the depth budget.
    pub digits: DigitString,
    pub milestones: Vec<Milestone>,
    /// The budget ran out before the requested number of milestones.
    pub exhausted: bool,
}

impl ExpansionResult {
    /// Re-checks every milestone by direct evaluation: the truncated digits are
    /// a prefix of `x`, the gap matches, and it is within `psi(depth)`.
    pub fn verify(&self, x: &Float, psi: &PsiSpec, ctx: &BetaContext) -> Result<bool> {
        let slack = Float::with_val(ctx.precision_bits(), ctx.tolerance() * ctx.tolerance());
        let mut last = 0;
        for m in &self.milestones {
            if m.depth <= last || m.depth as usize > self.digits.len() || m.gap.is_sign_negative() {
                return Ok(false);
            }
            last = m.depth;
            let check = is_prefix(x, &self.digits.truncated(m.depth as usize), ctx)?;
            let drift = Float::with_val(ctx.precision_bits(), &check.gap - &m.gap).abs();
            let psi_m = psi_eval(psi, m.depth);
            let bound = Float::with_val(ctx.precision_bits(), &psi_m + &slack);
            if !check.is_prefix || drift > slack || m.gap > bound {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Builds a prefix of `x` with infinitely-often-style milestones: depths `m`
/// at which `x` lies within `psi(m)` above the corresponding level sum.
///
/// Each round continues from the current orbit point `y` at depth `D` and looks
/// for the smallest `n` whose best gap for `y` is at most `psi(n) / C`, where
/// `C` is chosen so that `psi(n) / (C beta^D) <= psi(n + D)` on the remaining
/// window. The milestone gap for `x` is then `beta^(-D)` times the round gap.
pub fn construct_expansion(
    x: &Float,
    psi: &PsiSpec,
    depth_budget: u32,
    milestones_wanted: u32,
    ctx: &BetaContext,
) -> Result<ExpansionResult> {
    if depth_budget == 0 || milestones_wanted == 0 {
        return Err(Error::InvalidArgument("depth budget and milestone count must be positive".into()));
    }
    let psi_values: Vec<Float> = (1..=depth_budget).map(|n| psi_eval(psi, n)).collect();
    if let Some(i) = psi_values.iter().position(Float::is_zero) {
        return Err(Error::ZeroPsi(i as u32 + 1));
    }
    let prec = ctx.precision_bits();
    let psi_at = |n: u32| &psi_values[n as usize - 1];

    let mut y = ctx.start(x)?;
    let mut depth = 0u32;
    let mut digits = DigitString::new();
    let mut milestones = Vec::new();
    let mut exhausted = false;

    while milestones.len() < milestones_wanted as usize {
        let remaining = depth_budget - depth;
        if remaining == 0 {
            exhausted = true;
            break;
        }
        let scale = round_scale(psi, depth, remaining, &psi_at, ctx)?;
        let found = match next_good_prefix(&y, remaining, &scale, &psi_at, ctx) {
            Ok(found) => found,
            Err(Error::BudgetExceeded(_)) => None,
            Err(e) => return Err(e),
        };
        let Some((n, round_digits)) = found else {
            exhausted = true;
            break;
        };
        for &d in round_digits.as_slice() {
            y = ctx.clamp(orbit_step(&y, d, ctx));
        }
        digits.extend_from(&round_digits);
        depth += n;
        let gap = Float::with_val(prec, &y / ctx.beta_pow(depth));
        milestones.push(Milestone { depth, gap });
    }

    if milestones.is_empty() {
        return Err(Error::BudgetExhaustedNoMilestone(depth_budget));
    }
    if depth < depth_budget {
        digits.extend_from(&extremal_expansion(&y, depth_budget - depth, ExtremalMode::Greedy, ctx)?);
    }
    let result = ExpansionResult { digits, milestones, exhausted };
    assert!(result.verify(x, psi, ctx)?, "constructed milestones failed verification");
    Ok(result)
}

/// `C * beta^D` for the round starting at depth `D`, as an exact-enough real.
fn round_scale<'a>(
    psi: &PsiSpec,
    depth: u32,
    remaining: u32,
    psi_at: &impl Fn(u32) -> &'a Float,
    ctx: &BetaContext,
) -> Result<Float> {
    let prec = ctx.precision_bits();
    let beta_d = ctx.beta_pow(depth);
    let mut c = if depth == 0 {
        Integer::from(1)
    } else {
        let c_d = decay_constant(psi, depth, remaining)?;
        let ratio = Float::with_val(prec, Float::with_val(prec, &c_d) / &beta_d);
        ratio.ceil().to_integer().expect("finite").max(Integer::from(1))
    };
    // Verify psi(n) / (C beta^D) <= psi(n + D) on the window, doubling C if not.
    for _ in 0..256 {
        let scale = Float::with_val(prec, &beta_d * &c);
        let holds = (1..=remaining).all(|n| {
            let lhs = Float::with_val(prec, psi_at(n) / &scale);
            lhs <= *psi_at(n + depth)
        });
        if holds {
            return Ok(scale);
        }
        c *= 2u32;
    }
    Err(Error::InvalidArgument(format!("no scaling constant found at depth {depth}")))
}

/// Smallest `n <= remaining` with a best gap for `y` at most `psi(n) / scale`.
fn next_good_prefix<'a>(
    y: &Float,
    remaining: u32,
    scale: &Float,
    psi_at: &impl Fn(u32) -> &'a Float,
    ctx: &BetaContext,
) -> Result<Option<(u32, DigitString)>> {
    let prec = ctx.precision_bits();
    let mut lo = 1;
    while lo <= remaining {
        let hi = (lo + SEARCH_WINDOW - 1).min(remaining);
        for best in min_gaps_in_range(y, lo, hi, ctx)? {
            let target = Float::with_val(prec, psi_at(best.n) / scale);
            if best.gap <= target {
                return Ok(Some((best.n, best.digits)));
            }
        }
        lo = hi + 1;
    }
    Ok(None)
}
