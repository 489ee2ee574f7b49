//! Bernoulli-convolution density estimates: normalized prefix counts and
//! direct Monte Carlo sampling of `sum e_i beta^(-i)` with fair bits.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::{count_prefixes, BetaContext};

/// Samples per independent random stream.
pub const MC_BATCH: u64 = 4096;

pub const MIN_GRID_POINTS: usize = 10;
pub const MIN_MC_SAMPLES: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "method", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DensityMethod {
    PrefixCount { n: u32 },
    MonteCarlo { samples: u64, seed: u64, series_depth: u32 },
}

/// Density values on equal cells covering `[0, c]`, integrating to one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub c: f64,
    pub cell_width: f64,
    /// Cell centers.
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(flatten)]
    pub method: DensityMethod,
}

impl DensityEstimate {
    fn from_raw(c: f64, raw: Vec<f64>, method: DensityMethod) -> Self {
        let width = c / raw.len() as f64;
        let grid = (0..raw.len()).map(|i| (i as f64 + 0.5) * width).collect();
        let mut estimate = Self { c, cell_width: width, grid, values: raw, method };
        estimate.normalize();
        estimate
    }

    fn normalize(&mut self) {
        let total = self.integral();
        if total > 0.0 {
            for v in &mut self.values {
                *v /= total;
            }
        }
    }

    /// Midpoint-rule integral over `[0, c]`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_width
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `max |h(x) - h(c - x)|` over mirrored cells.
    pub fn asymmetry(&self) -> f64 {
        let n = self.values.len();
        (0..n / 2).map(|i| (self.values[i] - self.values[n - 1 - i]).abs()).fold(0.0, f64::max)
    }

    /// Value of the cell containing `x`.
    pub fn value_at(&self, x: f64) -> f64 {
        let i = ((x / self.cell_width).floor().max(0.0) as usize).min(self.values.len() - 1);
        self.values[i]
    }

    /// `x,value` rows.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["x", "value"])?;
        for (x, v) in self.grid.iter().zip(&self.values) {
            w.serialize((x, v))?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
    }

    /// Averages onto `cells` equal cells by overlap length.
    fn resampled(&self, cells: usize) -> Vec<f64> {
        let width = self.c / cells as f64;
        let mut out = vec![0.0; cells];
        for (i, v) in self.values.iter().enumerate() {
            let (lo, hi) = (i as f64 * self.cell_width, (i + 1) as f64 * self.cell_width);
            let first = ((lo / width).floor() as usize).min(cells - 1);
            let last = ((hi / width).ceil() as usize).min(cells);
            for (j, slot) in out.iter_mut().enumerate().take(last).skip(first) {
                let overlap = hi.min((j + 1) as f64 * width) - lo.max(j as f64 * width);
                if overlap > 0.0 {
                    *slot += v * overlap / width;
                }
            }
        }
        out
    }
}

/// Prefix-count estimate: `(beta/2)^n * #prefixes(x, n)` at each cell center.
pub fn estimate_density_prefix(ctx: &BetaContext, n: u32, grid_points: usize) -> Result<DensityEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if grid_points < MIN_GRID_POINTS {
        return Err(Error::InvalidArgument(format!("at least {MIN_GRID_POINTS} grid points are required")));
    }
    let prec = ctx.precision_bits();
    let scale = (ctx.beta().to_f64() / 2.0).powi(n as i32);
    let raw = (0..grid_points)
        .into_par_iter()
        .map(|i| {
            let x = Float::with_val(prec, ctx.c() * (2 * i + 1) as u32) / (2 * grid_points) as u32;
            Ok(count_prefixes(&x, n, ctx)? as f64 * scale)
        })
        .collect::<Vec<Result<f64>>>()
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    Ok(DensityEstimate::from_raw(ctx.c().to_f64(), raw, DensityMethod::PrefixCount { n }))
}

/// Smallest depth whose truncation error `c beta^(-d)` is under a tenth of a cell.
pub fn default_series_depth(ctx: &BetaContext, bins: usize) -> u32 {
    let beta = ctx.beta().to_f64();
    let c = ctx.c().to_f64();
    let cell = c / bins as f64;
    let mut d = 1;
    while c * beta.powi(-d) >= cell / 10.0 {
        d += 1;
    }
    d as u32
}

/// Histogram of `sum_{i<=depth} e_i beta^(-i)` over fair random bits.
///
/// Sample `k` belongs to batch `k / MC_BATCH`, whose generator is seeded with
/// `seed` on stream `batch`, so the result does not depend on scheduling.
pub fn estimate_density_mc(
    ctx: &BetaContext,
    samples: u64,
    bins: usize,
    seed: u64,
    series_depth: Option<u32>,
) -> Result<DensityEstimate> {
    if samples < MIN_MC_SAMPLES || bins == 0 {
        return Err(Error::InvalidArgument(format!("need at least {MIN_MC_SAMPLES} samples and one bin")));
    }
    let shallowest = default_series_depth(ctx, bins);
    let depth = series_depth.unwrap_or(shallowest);
    if depth < shallowest {
        return Err(Error::InvalidArgument(format!(
            "series depth {depth} leaves a tail above a tenth of a bin; use at least {shallowest}"
        )));
    }
    let beta = ctx.beta().to_f64();
    let c = ctx.c().to_f64();
    let weights: Vec<f64> = (1..=depth as i32).map(|i| beta.powi(-i)).collect();
    let width = c / bins as f64;
    let batches = samples.div_ceil(MC_BATCH);
    let counts = (0..batches)
        .into_par_iter()
        .map(|batch| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(batch);
            let size = MC_BATCH.min(samples - batch * MC_BATCH);
            let mut hist = vec![0u64; bins];
            for _ in 0..size {
                let mut value = 0.0;
                for chunk in weights.chunks(64) {
                    let bits = rng.next_u64();
                    for (i, w) in chunk.iter().enumerate() {
                        if bits >> i & 1 == 1 {
                            value += w;
                        }
                    }
                }
                let cell = ((value / width) as usize).min(bins - 1);
                hist[cell] += 1;
            }
            hist
        })
        .reduce(|| vec![0u64; bins], |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        });
    let raw = counts.into_iter().map(|k| k as f64).collect();
    Ok(DensityEstimate::from_raw(c, raw, DensityMethod::MonteCarlo { samples, seed, series_depth: depth }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensityDistance {
    pub l1: f64,
    pub sup: f64,
}

/// L1 and sup distances after renormalizing both and averaging onto the coarser grid.
pub fn compare_densities(a: &DensityEstimate, b: &DensityEstimate) -> Result<DensityDistance> {
    if (a.c - b.c).abs() > 1e-9 * a.c.max(b.c) {
        return Err(Error::IncompatibleSupport(format!("[0, {}] vs [0, {}]", a.c, b.c)));
    }
    let cells = a.values.len().min(b.values.len());
    let mut a = a.clone();
    let mut b = b.clone();
    a.normalize();
    b.normalize();
    let (ra, rb) = (a.resampled(cells), b.resampled(cells));
    let width = a.c / cells as f64;
    let l1 = ra.iter().zip(&rb).map(|(x, y)| (x - y).abs()).sum::<f64>() * width;
    let sup = ra.iter().zip(&rb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(DensityDistance { l1, sup })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthDiagnostic {
    pub x: f64,
    /// `(n, (beta/2)^n * #prefixes(x, n))`
    pub ratios: Vec<(u32, f64)>,
    /// Largest ratio over smallest.
    pub spread: f64,
}

pub fn growth_diagnostic(x: &Float, ctx: &BetaContext, depths: &[u32]) -> Result<GrowthDiagnostic> {
    if depths.is_empty() {
        return Err(Error::InvalidArgument("at least one depth is required".into()));
    }
    let half = ctx.beta().to_f64() / 2.0;
    let ratios = depths
        .iter()
        .map(|&n| Ok((n, count_prefixes(x, n, ctx)? as f64 * half.powi(n as i32))))
        .collect::<Result<Vec<_>>>()?;
    let max = ratios.iter().map(|r| r.1).fold(f64::MIN, f64::max);
    let min = ratios.iter().map(|r| r.1).fold(f64::MAX, f64::min);
    Ok(GrowthDiagnostic { x: x.to_f64(), ratios, spread: max / min })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preconditions_are_enforced() {
        let ctx = BetaContext::sqrt2();
        assert!(estimate_density_prefix(&ctx, 10, 9).is_err());
        assert!(estimate_density_mc(&ctx, 9_999, 10, 0, None).is_err());
        let d = default_series_depth(&ctx, 10);
        assert!(estimate_density_mc(&ctx, 10_000, 10, 0, Some(d - 1)).is_err());
        assert!(estimate_density_mc(&ctx, 10_000, 10, 0, Some(d)).is_ok());
    }

    #[test]
    fn prefix_estimate_is_normalized_and_bounded() {
        let ctx = BetaContext::sqrt2();
        let est = estimate_density_prefix(&ctx, 14, 51).unwrap();
        assert!((est.integral() - 1.0).abs() < 1e-12);
        assert!(est.values.iter().all(|v| *v >= 0.0));
        assert!(est.max_value() <= 4.8285 + 0.1);
        assert_eq!(est.grid.len(), 51);
    }

    #[test]
    fn mc_is_deterministic_and_normalized() {
        let ctx = BetaContext::sqrt2();
        let a = estimate_density_mc(&ctx, 20_000, 40, 9, None).unwrap();
        let b = estimate_density_mc(&ctx, 20_000, 40, 9, None).unwrap();
        assert_eq!(a, b);
        assert!((a.integral() - 1.0).abs() < 1e-12);
        let other = estimate_density_mc(&ctx, 20_000, 40, 10, None).unwrap();
        assert_ne!(a.values, other.values);
    }

    #[test]
    fn default_depth_matches_rule() {
        let ctx = BetaContext::sqrt2();
        let d = default_series_depth(&ctx, 100);
        let c = ctx.c().to_f64();
        let b = ctx.beta().to_f64();
        assert!(c * b.powi(-(d as i32)) < c / 1000.0);
        assert!(c * b.powi(-(d as i32 - 1)) >= c / 1000.0);
    }

    #[test]
    fn compare_identities() {
        let ctx = BetaContext::sqrt2();
        let a = estimate_density_mc(&ctx, 10_000, 30, 1, None).unwrap();
        assert_eq!(compare_densities(&a, &a).unwrap(), DensityDistance { l1: 0.0, sup: 0.0 });
        let mut doubled = a.clone();
        doubled.values.iter_mut().for_each(|v| *v *= 2.0);
        let d = compare_densities(&a, &doubled).unwrap();
        assert!(d.l1 < 1e-12 && d.sup < 1e-12);
        let other = BetaContext::from_decimal("1.5", 256).unwrap();
        let b = estimate_density_mc(&other, 10_000, 30, 1, None).unwrap();
        assert!(matches!(compare_densities(&a, &b), Err(Error::IncompatibleSupport(_))));
    }

    #[test]
    fn resampling_preserves_mass() {
        let ctx = BetaContext::sqrt2();
        let a = estimate_density_prefix(&ctx, 10, 201).unwrap();
        let coarse = a.resampled(100);
        let mass: f64 = coarse.iter().sum::<f64>() * a.c / 100.0;
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn growth_at_endpoints() {
        let ctx = BetaContext::sqrt2();
        let zero = growth_diagnostic(&Float::new(256), &ctx, &[4, 8, 12]).unwrap();
        let half = 2f64.sqrt() / 2.0;
        assert!((zero.ratios[0].1 - half.powi(4)).abs() < 1e-15);
        assert!(zero.ratios.windows(2).all(|w| w[0].1 > w[1].1));
        assert!((zero.spread - half.powi(4 - 12)).abs() < 1e-9);
        let top = growth_diagnostic(ctx.c(), &ctx, &[4, 8, 12]).unwrap();
        assert_eq!(top.ratios, zero.ratios);
    }
}
