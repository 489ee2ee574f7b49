//! Seeded Monte Carlo estimates of how often uniform points are hit by
//! psi-good level sums in a window of depths.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::Float;
use serde::Serialize;

use crate::approx::{scan_levels, HitMode, PsiSpec};
use crate::error::{Error, Result};
use crate::expansion::BetaContext;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageReport {
    pub beta_label: String,
    pub psi: PsiSpec,
    pub n_range: [u32; 2],
    pub mode: HitMode,
    pub samples: u64,
    pub seed: u64,
    /// Fraction of samples with at least one hit in the range.
    pub hit_fraction: f64,
    pub per_level_hit_rate: Vec<(u32, f64)>,
    pub mean_hits_per_sample: f64,
}

#[derive(Clone, Debug)]
pub struct CoverageExperiment {
    pub beta_label: String,
    pub psi: PsiSpec,
    pub n_lo: u32,
    pub n_hi: u32,
    pub mode: HitMode,
    pub samples: u64,
    pub seed: u64,
}

impl CoverageExperiment {
    pub fn new(beta_label: impl Into<String>, psi: PsiSpec, n_lo: u32, n_hi: u32, samples: u64, seed: u64) -> Self {
        Self { beta_label: beta_label.into(), psi, n_lo, n_hi, mode: HitMode::OneSided, samples, seed }
    }

    pub fn with_mode(mut self, mode: HitMode) -> Self {
        self.mode = mode;
        self
    }

    /// The `i`-th sample point: `u c` with `u` uniform on `[0, 1)` from the
    /// generator seeded with `seed` on stream `i`.
    pub fn sample_point(&self, ctx: &BetaContext, i: u64) -> Float {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(i);
        let u: f64 = rng.gen();
        Float::with_val(ctx.precision_bits(), ctx.c() * u)
    }

    fn sample_hits(&self, ctx: &BetaContext, i: u64) -> Result<Vec<bool>> {
        let x = self.sample_point(ctx, i);
        Ok(scan_levels(&x, &self.psi, self.n_lo, self.n_hi, self.mode, ctx)?.into_iter().map(|s| s.hit).collect())
    }

    fn check(&self) -> Result<()> {
        if self.samples == 0 || self.n_lo == 0 || self.n_lo > self.n_hi {
            return Err(Error::InvalidArgument("need samples >= 1 and 1 <= n_lo <= n_hi".into()));
        }
        Ok(())
    }

    pub fn run(&self, ctx: &BetaContext) -> Result<CoverageReport> {
        self.check()?;
        let rows: Vec<Result<Vec<bool>>> = (0..self.samples).into_par_iter().map(|i| self.sample_hits(ctx, i)).collect();
        self.aggregate(rows.into_iter().collect::<Result<Vec<_>>>()?)
    }

    /// Single-threaded run; identical output to [`Self::run`].
    pub fn run_sequential(&self, ctx: &BetaContext) -> Result<CoverageReport> {
        self.check()?;
        let rows = (0..self.samples).map(|i| self.sample_hits(ctx, i)).collect::<Result<Vec<_>>>()?;
        self.aggregate(rows)
    }

    fn aggregate(&self, rows: Vec<Vec<bool>>) -> Result<CoverageReport> {
        let levels = (self.n_hi - self.n_lo + 1) as usize;
        let mut per_level = vec![0u64; levels];
        let mut any = 0u64;
        let mut total = 0u64;
        for row in &rows {
            any += u64::from(row.iter().any(|&h| h));
            for (slot, &h) in per_level.iter_mut().zip(row) {
                *slot += u64::from(h);
                total += u64::from(h);
            }
        }
        let n = self.samples as f64;
        Ok(CoverageReport {
            beta_label: self.beta_label.clone(),
            psi: self.psi.clone(),
            n_range: [self.n_lo, self.n_hi],
            mode: self.mode,
            samples: self.samples,
            seed: self.seed,
            hit_fraction: any as f64 / n,
            per_level_hit_rate: per_level.iter().enumerate().map(|(i, &k)| (self.n_lo + i as u32, k as f64 / n)).collect(),
            mean_hits_per_sample: total as f64 / n,
        })
    }
}

/// One-sided coverage run labelled by the decimal value of beta.
pub fn coverage_experiment(
    ctx: &BetaContext,
    psi: &PsiSpec,
    n_range: (u32, u32),
    samples: u64,
    seed: u64,
) -> Result<CoverageReport> {
    let label = crate::real::short_string(ctx.beta());
    CoverageExperiment::new(label, psi.clone(), n_range.0, n_range.1, samples, seed).run(ctx)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub beta_label: String,
    pub psi: String,
    pub n_lo: u32,
    pub n_hi: u32,
    pub hit_fraction: f64,
    pub mean_hits: f64,
}

/// Rows sorted by hit fraction, highest first; ties keep label order.
pub fn contrast_summary(reports: &[CoverageReport]) -> Vec<SummaryRow> {
    let mut rows: Vec<SummaryRow> = reports
        .iter()
        .map(|r| SummaryRow {
            beta_label: r.beta_label.clone(),
            psi: r.psi.to_string(),
            n_lo: r.n_range[0],
            n_hi: r.n_range[1],
            hit_fraction: r.hit_fraction,
            mean_hits: r.mean_hits_per_sample,
        })
        .collect();
    rows.sort_by(|a, b| b.hit_fraction.total_cmp(&a.hit_fraction).then_with(|| a.beta_label.cmp(&b.beta_label)));
    rows
}

/// CSV table of summary rows.
pub fn summary_csv(rows: &[SummaryRow]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
}

/// `n,hit_rate` rows for plotting.
pub fn plot_data_csv(report: &CoverageReport) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "hit_rate"])?;
    for (n, rate) in &report.per_level_hit_rate {
        w.serialize((n, rate))?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(psi: PsiSpec, lo: u32, hi: u32) -> CoverageExperiment {
        CoverageExperiment::new("sqrt2", psi, lo, hi, 40, 5)
    }

    #[test]
    fn constant_psi_extremes() {
        let ctx = BetaContext::sqrt2();
        let big = PsiSpec::constant(&Float::with_val(64, 3));
        let all = small(big, 1, 10).run(&ctx).unwrap();
        assert_eq!(all.hit_fraction, 1.0);
        assert_eq!(all.mean_hits_per_sample, 10.0);
        let none = small(PsiSpec::constant(&Float::new(64)), 1, 10).run(&ctx).unwrap();
        assert_eq!(none.hit_fraction, 0.0);
    }

    #[test]
    fn parallel_matches_sequential() {
        let ctx = BetaContext::sqrt2();
        let exp = small(PsiSpec::geometric(2), 5, 15);
        assert_eq!(exp.run(&ctx).unwrap(), exp.run_sequential(&ctx).unwrap());
    }

    #[test]
    fn monotone_in_range_and_psi() {
        let ctx = BetaContext::sqrt2();
        let narrow = small(PsiSpec::geometric(2), 8, 12).run(&ctx).unwrap();
        let wide = small(PsiSpec::geometric(2), 6, 14).run(&ctx).unwrap();
        assert!(wide.hit_fraction >= narrow.hit_fraction);
        let smaller = small(PsiSpec::geometric(2).with_scale(3), 6, 14).run(&ctx).unwrap();
        assert!(smaller.hit_fraction <= wide.hit_fraction);
    }

    #[test]
    fn summary_order() {
        let ctx = BetaContext::sqrt2();
        let mut a = small(PsiSpec::geometric(2), 1, 6).run(&ctx).unwrap();
        let mut b = a.clone();
        a.beta_label = "zeta".into();
        b.beta_label = "alpha".into();
        let rows = contrast_summary(&[a.clone(), b]);
        assert_eq!(rows[0].beta_label, "alpha");
        let single = contrast_summary(std::slice::from_ref(&a));
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].hit_fraction, a.hit_fraction);
        let csv = summary_csv(&single).unwrap();
        assert!(csv.starts_with("beta_label,psi,n_lo,n_hi,hit_fraction,mean_hits\n"));
    }
}
