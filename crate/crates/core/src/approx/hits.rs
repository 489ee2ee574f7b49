use rug::Float;
use serde::Serialize;

use super::psi::{psi_eval, PsiSpec};
use crate::error::Result;
use crate::expansion::{min_gap, min_gaps_in_range, BetaContext, DigitString};
use crate::real::serde_float;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HitMode {
    /// Level sums at or below `x`.
    OneSided,
    /// Level sums on either side of `x`.
    TwoSided,
}

/// A level `n` with a level-n sum within `psi(n)` of `x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HitRecord {
    pub n: u32,
    #[serde(with = "serde_float")]
    pub gap: Float,
    pub digits: DigitString,
    #[serde(with = "serde_float")]
    pub psi_n: Float,
    /// The hit comes from a level sum above `x`.
    pub two_sided: bool,
}

/// Per-level outcome of a scan, hit or not.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelScan {
    pub n: u32,
    /// Best one-sided gap.
    #[serde(with = "serde_float")]
    pub gap: Float,
    #[serde(with = "serde_float")]
    pub psi_n: Float,
    pub hit: bool,
    #[serde(skip)]
    pub record: Option<HitRecord>,
}

/// Scans every level in `n_lo..=n_hi`.
pub fn scan_levels(
    x: &Float,
    psi: &PsiSpec,
    n_lo: u32,
    n_hi: u32,
    mode: HitMode,
    ctx: &BetaContext,
) -> Result<Vec<LevelScan>> {
    let below = min_gaps_in_range(x, n_lo, n_hi, ctx)?;
    let mut out = Vec::with_capacity(below.len());
    for best in below {
        let psi_n = psi_eval(psi, best.n);
        let mut record = (best.gap <= psi_n).then(|| HitRecord {
            n: best.n,
            gap: best.gap.clone(),
            digits: best.digits.clone(),
            psi_n: psi_n.clone(),
            two_sided: false,
        });
        if record.is_none() && mode == HitMode::TwoSided {
            record = upper_hit(x, best.n, &psi_n, ctx)?;
        }
        out.push(LevelScan { n: best.n, gap: best.gap, hit: record.is_some(), psi_n, record });
    }
    Ok(out)
}

/// Levels in `n_lo..=n_hi` where `x` is within `psi(n)` of a level-n sum.
pub fn hit_depths(
    x: &Float,
    psi: &PsiSpec,
    n_lo: u32,
    n_hi: u32,
    mode: HitMode,
    ctx: &BetaContext,
) -> Result<Vec<HitRecord>> {
    Ok(scan_levels(x, psi, n_lo, n_hi, mode, ctx)?.into_iter().filter_map(|s| s.record).collect())
}

/// Closest level-n sum at or above `x`, found from below for the reflected
/// point `S_n - x` where `S_n = sum_{i<=n} beta^(-i)`: complementing the digits
/// maps sums below `S_n - x` to sums above `x`.
fn upper_hit(x: &Float, n: u32, psi_n: &Float, ctx: &BetaContext) -> Result<Option<HitRecord>> {
    let prec = ctx.precision_bits();
    let tail = Float::with_val(prec, ctx.c() / ctx.beta_pow(n));
    let reflected = Float::with_val(prec, ctx.c() - &tail) - x;
    if reflected < Float::with_val(prec, -ctx.tolerance()) {
        return Ok(None);
    }
    let best = min_gap(&reflected, n, ctx)?;
    Ok((best.gap <= *psi_n).then(|| HitRecord {
        n,
        gap: best.gap,
        digits: best.digits.complement(),
        psi_n: psi_n.clone(),
        two_sided: true,
    }))
}

/// `n,gap,psi_n,hit` rows.
pub fn scan_csv(scans: &[LevelScan]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "gap", "psi_n", "hit"])?;
    for s in scans {
        w.serialize((s.n, crate::real::decimal_string(&s.gap), crate::real::decimal_string(&s.psi_n), s.hit))?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
}
