use rug::{Assign, Float};
use serde::Serialize;

use super::context::BetaContext;
use super::digits::DigitString;
use super::orbit::Walk;
use super::table::LevelSumTable;
use crate::error::{Error, Result};
use crate::real::serde_float;

/// The table only pays off once the walk would otherwise go this much deeper than it.
const TABLE_MARGIN: u32 = 8;

/// Best level-n approximation from below: the smallest `x - sum` over n-prefixes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelGap {
    pub n: u32,
    #[serde(with = "serde_float")]
    pub gap: Float,
    pub digits: DigitString,
}

/// Smallest gap `x - sum e_i beta^(-i)` over the n-prefixes of `x`, with a witness.
pub fn min_gap(x: &Float, n: u32, ctx: &BetaContext) -> Result<LevelGap> {
    Ok(min_gaps_in_range(x, n, n, ctx)?.pop().expect("one level"))
}

/// [`min_gap`] for every level in `n_lo..=n_hi`, from a single tree walk.
///
/// Branch-and-bound with the T_1 child first. Below depth `n - m` the walk is
/// finished by a floor lookup in the sorted table of level-`m` sums, which is
/// exact: the largest level-`m` sum not above `y` is the best completion.
pub fn min_gaps_in_range(x: &Float, n_lo: u32, n_hi: u32, ctx: &BetaContext) -> Result<Vec<LevelGap>> {
    if n_lo == 0 || n_lo > n_hi {
        return Err(Error::InvalidArgument(format!("bad level range [{n_lo}, {n_hi}]")));
    }
    let start = ctx.start(x)?;
    let m = ctx.tail_depth();
    let table = if m > 0 && n_hi >= m + TABLE_MARGIN { ctx.level_table() } else { None };
    let walk_depth = match table {
        Some(_) => (n_hi - m).max(n_hi.min(m)),
        None => n_hi,
    };
    let levels = (n_hi - n_lo + 1) as usize;
    let beta_f = ctx.beta.to_f64();
    let mut search = Search {
        walk: Walk::new(ctx, start, walk_depth),
        table,
        m,
        n_lo,
        n_hi,
        walk_depth,
        c_f: ctx.c.to_f64(),
        pow_f: (0..=n_hi).map(|k| beta_f.powi(k as i32)).collect(),
        tail_scale: ctx.beta_pow(m),
        best: vec![None; levels],
        best_f: vec![f64::INFINITY; levels],
        scratch: Float::new(ctx.precision_bits),
    };
    search.visit(0)?;
    search
        .best
        .into_iter()
        .enumerate()
        .map(|(i, b)| {
            let n = n_lo + i as u32;
            let (final_value, digits) = b.expect("every point has an n-prefix");
            let gap = Float::with_val(ctx.precision_bits, &final_value / ctx.beta_pow(n));
            Ok(LevelGap { n, gap, digits })
        })
        .collect()
}

struct Search<'a> {
    walk: Walk<'a>,
    table: Option<&'a LevelSumTable>,
    m: u32,
    n_lo: u32,
    n_hi: u32,
    walk_depth: u32,
    c_f: f64,
    pow_f: Vec<f64>,
    tail_scale: Float,
    best: Vec<Option<(Float, DigitString)>>,
    best_f: Vec<f64>,
    scratch: Float,
}

impl Search<'_> {
    fn in_range(&self, n: u32) -> bool {
        (self.n_lo..=self.n_hi).contains(&n)
    }

    fn record(&mut self, n: u32, value: Float, digits: impl FnOnce(&Walk) -> DigitString) {
        let slot = (n - self.n_lo) as usize;
        if self.best[slot].as_ref().is_none_or(|(b, _)| value < *b) {
            self.best_f[slot] = value.to_f64();
            let digits = digits(&self.walk);
            self.best[slot] = Some((value, digits));
        }
    }

    fn visit(&mut self, k: u32) -> Result<()> {
        let ku = k as usize;
        if k <= self.walk_depth && self.in_range(k) {
            let slot = (k - self.n_lo) as usize;
            if self.best[slot].as_ref().is_none_or(|(b, _)| self.walk.values[ku] < *b) {
                let value = self.walk.values[ku].clone();
                self.record(k, value, |w| w.path(ku));
            }
        }
        let level = k + self.m;
        if let Some(table) = self.table.filter(|_| level > self.walk_depth && self.in_range(level)) {
            let ctx = self.walk.ctx;
            self.scratch.assign(&self.walk.values[ku] + &ctx.tau);
            let idx = table.floor_index(&self.scratch).expect("the zero sum is always below");
            let mut value = Float::with_val(ctx.precision_bits, &self.walk.values[ku] - &table.sums()[idx]);
            value *= &self.tail_scale;
            if value.is_sign_negative() {
                value.assign(0u32);
            }
            self.record(level, value, |w| {
                let mut digits = w.path(ku);
                digits.extend_from(&table.digits(idx));
                digits
            });
        }
        if k == self.walk_depth || !self.worth_descending(k) {
            return Ok(());
        }
        for digit in [1, 0] {
            if self.walk.step(ku, digit)? {
                self.visit(k + 1)?;
            }
        }
        Ok(())
    }

    /// Whether some level reachable below depth `k` could still improve.
    fn worth_descending(&mut self, k: u32) -> bool {
        let ctx = self.walk.ctx;
        self.scratch.assign(&ctx.c - &self.walk.values[k as usize]);
        let dist = self.scratch.to_f64();
        let first = (k + 1).max(self.n_lo);
        for n in (first..=self.n_hi).rev() {
            let reachable = n <= self.walk_depth || (self.table.is_some() && n - self.m > k);
            if !reachable {
                continue;
            }
            // All-ones continuation bounds the final value from below.
            let lower = (self.c_f - self.pow_f[(n - k) as usize] * dist).max(0.0);
            if lower <= self.best_f[(n - self.n_lo) as usize] + 1e-9 {
                return true;
            }
        }
        false
    }
}
