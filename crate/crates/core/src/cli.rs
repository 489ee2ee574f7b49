//! Command-line front end. [`dispatch`] parses arguments, runs one command and
//! returns the process exit status.

use std::ffi::OsString;
use std::io::Write;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::Float;
use serde::Serialize;

use crate::algebraic::{all_roots, certify_garsia, parse_polynomial, Certification, GarsiaCertificate, Rejection};
use crate::approx::{
    construct_expansion, decay_constant, divergence_partial_sum, psi_eval, scan_csv, scan_levels, HitMode,
    HitRecord, PsiSpec,
};
use crate::density::{compare_densities, estimate_density_mc, estimate_density_prefix, growth_diagnostic};
use crate::error::Error;
use crate::expansion::{
    count_prefixes, enumerate_prefixes, extremal_expansion, min_gap, unique_to_depth, BetaContext, ExtremalMode,
    UniquenessVerdict,
};
use crate::experiment::{contrast_summary, plot_data_csv, summary_csv, CoverageExperiment};
use crate::real::{decimal_string, parse_decimal, precision_for_depth};

#[derive(Parser, Debug)]
#[command(name = "beta-approx", version, about = "Beta-expansions, Garsia numbers and psi-good approximations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug)]
struct Global {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    output: Format,
    /// Working precision in bits [default: max(256, depth + 64)].
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// Maximum number of tree nodes per search.
    #[arg(long, global = true, default_value_t = crate::expansion::DEFAULT_NODE_BUDGET)]
    budget: u64,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, Default)]
struct BetaSource {
    /// Base as a decimal literal in (1, 2).
    #[arg(long)]
    beta: Vec<String>,
    /// Base as the root in (1, 2) of a monic integer polynomial.
    #[arg(long = "beta-poly")]
    beta_poly: Vec<String>,
}

#[derive(Args, Debug, Clone)]
struct PsiArgs {
    /// geometric:R, scaled-geometric:A:R, corollary or constant:A.
    #[arg(long)]
    psi: String,
    /// Cap psi at k2 * 2^-n; `auto` takes k2 from the Garsia certificate.
    #[arg(long = "cap-k2")]
    cap_k2: Option<String>,
    /// Divide psi by this integer.
    #[arg(long)]
    scale: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certify a Garsia number from its minimal polynomial.
    Certify { polynomial: String },
    /// Certified enclosures of all roots of a polynomial.
    Roots { polynomial: String },
    /// Greedy, lazy or psi-constructed expansions.
    Expand {
        #[command(subcommand)]
        mode: ExpandMode,
    },
    /// List or count the n-prefixes of a point.
    Prefixes {
        #[command(subcommand)]
        action: PrefixAction,
    },
    /// Best level-n approximation from below.
    Mingap {
        #[command(flatten)]
        beta: BetaSource,
        #[arg(long)]
        x: String,
        #[arg(long)]
        n: u32,
    },
    /// Levels at which a point is psi-approximated.
    Hits {
        #[command(flatten)]
        beta: BetaSource,
        #[command(flatten)]
        psi: PsiArgs,
        #[arg(long)]
        x: String,
        #[arg(long = "n-lo")]
        n_lo: u32,
        #[arg(long = "n-hi")]
        n_hi: u32,
        /// Also accept level sums above the point.
        #[arg(long = "two-sided")]
        two_sided: bool,
    },
    /// Monte Carlo hit fractions; several bases give a contrast table.
    Coverage {
        #[command(flatten)]
        beta: BetaSource,
        #[command(flatten)]
        psi: PsiArgs,
        #[arg(long = "n-lo")]
        n_lo: u32,
        #[arg(long = "n-hi")]
        n_hi: u32,
        #[arg(long, default_value_t = 500)]
        samples: u64,
        #[arg(long = "two-sided")]
        two_sided: bool,
        /// Emit `n,hit_rate` CSV rows for plotting instead of the report.
        #[arg(long = "plot-data")]
        plot_data: bool,
    },
    /// Bernoulli-convolution density estimates.
    Density {
        #[command(subcommand)]
        method: DensityCommand,
    },
    /// Whether the expansion of a point is forced up to a depth.
    Unique {
        #[command(flatten)]
        beta: BetaSource,
        #[arg(long)]
        x: String,
        #[arg(long)]
        n: u32,
    },
    /// Approximation-function utilities.
    Psi {
        #[command(subcommand)]
        action: PsiCommand,
    },
    /// Normalized prefix-count growth at several depths.
    Growth {
        #[command(flatten)]
        beta: BetaSource,
        #[arg(long)]
        x: String,
        #[arg(long, value_delimiter = ',', required = true)]
        depths: Vec<u32>,
    },
}

#[derive(Subcommand, Debug)]
enum ExpandMode {
    Greedy(ExtremalArgs),
    Lazy(ExtremalArgs),
    /// Chain psi-good prefixes into one expansion.
    Construct {
        #[command(flatten)]
        beta: BetaSource,
        #[command(flatten)]
        psi: PsiArgs,
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 60)]
        depth: u32,
        #[arg(long, default_value_t = 3)]
        milestones: u32,
    },
}

#[derive(Args, Debug)]
struct ExtremalArgs {
    #[command(flatten)]
    beta: BetaSource,
    #[arg(long)]
    x: String,
    #[arg(long)]
    n: u32,
}

#[derive(Subcommand, Debug)]
enum PrefixAction {
    List(ExtremalArgs),
    Count(ExtremalArgs),
}

#[derive(Subcommand, Debug)]
enum DensityCommand {
    /// Normalized prefix counts on a grid.
    Prefix {
        #[command(flatten)]
        beta: BetaSource,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 201)]
        grid: usize,
    },
    /// Histogram of random level sums.
    Mc {
        #[command(flatten)]
        beta: BetaSource,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 100)]
        bins: usize,
        /// Series truncation depth [default: tail below a tenth of a bin].
        #[arg(long)]
        depth: Option<u32>,
    },
    /// Distance between the prefix and Monte Carlo estimates.
    Compare {
        #[command(flatten)]
        beta: BetaSource,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 201)]
        grid: usize,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 100)]
        bins: usize,
    },
}

#[derive(Subcommand, Debug)]
enum PsiCommand {
    Eval {
        #[command(flatten)]
        beta: BetaSource,
        #[command(flatten)]
        psi: PsiArgs,
        #[arg(long)]
        n: u32,
    },
    Decay {
        #[command(flatten)]
        beta: BetaSource,
        #[command(flatten)]
        psi: PsiArgs,
        #[arg(long)]
        m: u32,
        #[arg(long = "n-max", default_value_t = 64)]
        n_max: u32,
    },
    Sum {
        #[command(flatten)]
        beta: BetaSource,
        #[command(flatten)]
        psi: PsiArgs,
        #[arg(long)]
        n: u32,
    },
}

/// Raised for inconsistent flags that clap cannot express.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

/// Raised after a Garsia rejection has been written out.
#[derive(Debug, thiserror::Error)]
#[error("{}: {}", .0.code, .0.detail)]
struct Rejected(Rejection);

/// Runs the command line `args` (program name first). Returns 0 on success,
/// 1 on usage errors, 2 on domain errors and 3 when a budget runs out.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    match run(&cli, out, err) {
        Ok(()) => 0,
        Err(e) if is_broken_pipe(&e) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                1
            } else if let Some(lib) = e.downcast_ref::<Error>() {
                lib.exit_status()
            } else {
                2
            }
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<std::io::Error>())
        .any(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
}

/// A resolved base with its certificate, when one exists.
struct Base {
    label: String,
    ctx: BetaContext,
    certificate: Option<GarsiaCertificate>,
}

impl Global {
    fn precision(&self, depth: u32) -> u32 {
        self.precision.unwrap_or_else(|| precision_for_depth(depth))
    }
}

impl BetaSource {
    fn resolve_all(&self, g: &Global, depth: u32, err: &mut dyn Write) -> anyhow::Result<Vec<Base>> {
        let prec = g.precision(depth);
        let mut bases = Vec::new();
        for text in &self.beta {
            let ctx = BetaContext::from_decimal(text, prec).map_err(|e| match e {
                Error::InvalidArgument(m) => anyhow!(Error::Domain { x: text.clone(), c: m }),
                other => anyhow!(other),
            })?;
            bases.push(Base { label: text.clone(), ctx: ctx.with_node_budget(g.budget), certificate: None });
        }
        for text in &self.beta_poly {
            let poly = parse_polynomial(text)?;
            let (ctx, certificate) = match certify_garsia(&poly, prec)? {
                Certification::Garsia(cert) => (BetaContext::from_certificate(&cert)?, Some(cert)),
                Certification::Rejected(r) => {
                    writeln!(err, "warning: {poly} is not a Garsia polynomial ({}: {}); no certificate applies", r.code, r.detail)?;
                    (BetaContext::new(&real_root_in_range(&poly, prec)?, prec)?, None)
                }
            };
            bases.push(Base { label: poly.to_string(), ctx: ctx.with_node_budget(g.budget), certificate });
        }
        if bases.is_empty() {
            bail!(UsageError("one of --beta or --beta-poly is required".into()));
        }
        Ok(bases)
    }

    fn resolve(&self, g: &Global, depth: u32, err: &mut dyn Write) -> anyhow::Result<Base> {
        let mut bases = self.resolve_all(g, depth, err)?;
        if bases.len() > 1 {
            bail!(UsageError("this command takes a single --beta or --beta-poly".into()));
        }
        Ok(bases.remove(0))
    }
}

fn real_root_in_range(poly: &crate::algebraic::IntPolynomial, prec: u32) -> anyhow::Result<Float> {
    let roots = all_roots(poly, prec)?;
    roots
        .iter()
        .find(|r| r.is_real() && r.re > 1u32 && r.re < 2u32)
        .map(|r| Float::with_val(prec, &r.re))
        .ok_or_else(|| anyhow!(Error::Domain { x: poly.to_string(), c: "no real root in (1, 2)".into() }))
}

fn parse_x(text: &str, ctx: &BetaContext) -> anyhow::Result<Float> {
    if text.trim() == "c" {
        return Ok(ctx.c().clone());
    }
    Ok(parse_decimal(text, ctx.precision_bits())?)
}

impl PsiArgs {
    fn build(&self, base: Option<&Base>) -> anyhow::Result<PsiSpec> {
        let mut spec: PsiSpec = self.psi.parse()?;
        if let Some(cap) = &self.cap_k2 {
            let k2 = if cap.trim() == "auto" {
                let cert = base.and_then(|b| b.certificate.as_ref()).ok_or_else(|| {
                    UsageError("--cap-k2 auto needs a --beta-poly source with a Garsia certificate".into())
                })?;
                cert.k2.clone()
            } else {
                parse_decimal(cap, crate::real::PARAM_PRECISION)?
            };
            if k2 <= 0u32 {
                bail!(Error::InvalidArgument("cap k2 must be positive".into()));
            }
            spec = spec.with_cap(&k2);
        }
        if let Some(k) = self.scale {
            if k == 0 {
                bail!(Error::InvalidArgument("scale must be positive".into()));
            }
            spec = spec.with_scale(k);
        }
        Ok(spec)
    }

    fn needs_base(&self) -> bool {
        self.cap_k2.as_deref().is_some_and(|c| c.trim() == "auto")
    }
}

fn emit_json<T: Serialize + ?Sized>(out: &mut dyn Write, value: &T) -> anyhow::Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

/// Writes `value` as JSON, or the CSV produced by `csv` in CSV mode.
fn emit<T: Serialize + ?Sized>(
    g: &Global,
    out: &mut dyn Write,
    value: &T,
    csv: impl FnOnce() -> anyhow::Result<String>,
) -> anyhow::Result<()> {
    match g.output {
        Format::Json => emit_json(out, value),
        Format::Csv => Ok(out.write_all(csv()?.as_bytes())?),
    }
}

fn csv_rows<R: Serialize>(rows: impl IntoIterator<Item = R>) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[derive(Serialize)]
struct CountOutput<'a> {
    x: String,
    n: u32,
    beta: &'a str,
    count: u64,
}

#[derive(Serialize)]
struct DigitsOutput {
    x: String,
    n: u32,
    mode: ExtremalMode,
    digits: String,
}

#[derive(Serialize)]
struct MinGapOutput {
    x: String,
    n: u32,
    gap: String,
    digits: String,
}

#[derive(Serialize)]
struct UniqueOutput {
    x: String,
    n: u32,
    #[serde(flatten)]
    verdict: UniquenessVerdict,
}

#[derive(Serialize)]
struct PsiValue {
    psi: PsiSpec,
    n: u32,
    value: String,
}

#[derive(Serialize)]
struct DecayOutput {
    psi: PsiSpec,
    m: u32,
    n_max: u32,
    c_m: String,
}

#[derive(Serialize, Clone)]
struct HitRow {
    n: u32,
    gap: String,
    digits: String,
    psi_n: String,
    two_sided: bool,
}

impl From<&HitRecord> for HitRow {
    fn from(h: &HitRecord) -> Self {
        Self {
            n: h.n,
            gap: decimal_string(&h.gap),
            digits: h.digits.to_string(),
            psi_n: decimal_string(&h.psi_n),
            two_sided: h.two_sided,
        }
    }
}

fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Certify { polynomial } => {
            let poly = parse_polynomial(polynomial)?;
            match certify_garsia(&poly, g.precision(0))? {
                Certification::Garsia(cert) => emit(g, out, &cert, || {
                    csv_rows([(
                        cert.polynomial.to_string(),
                        decimal_string(&cert.beta),
                        decimal_string(&cert.k2),
                        decimal_string(&cert.density_bound),
                        cert.precision_bits,
                    )])
                    .map(|body| format!("polynomial,beta,k2,density_bound,precision_bits\n{body}"))
                }),
                Certification::Rejected(r) => {
                    emit(g, out, &r, || csv_rows([&r]))?;
                    Err(Rejected(r).into())
                }
            }
        }
        Command::Roots { polynomial } => {
            let poly = parse_polynomial(polynomial)?;
            let roots = all_roots(&poly, g.precision(0))?;
            emit(g, out, &roots, || csv_rows(&roots.roots))
        }
        Command::Expand { mode } => match mode {
            ExpandMode::Greedy(a) | ExpandMode::Lazy(a) => {
                let which = if matches!(mode, ExpandMode::Greedy(_)) { ExtremalMode::Greedy } else { ExtremalMode::Lazy };
                let base = a.beta.resolve(g, a.n, err)?;
                let x = parse_x(&a.x, &base.ctx)?;
                let digits = extremal_expansion(&x, a.n, which, &base.ctx)?;
                let o = DigitsOutput { x: decimal_string(&x), n: a.n, mode: which, digits: digits.to_string() };
                emit(g, out, &o, || csv_rows([&o]))
            }
            ExpandMode::Construct { beta, psi, x, depth, milestones } => {
                let base = beta.resolve(g, *depth, err)?;
                let spec = psi.build(Some(&base))?;
                let x = parse_x(x, &base.ctx)?;
                let result = construct_expansion(&x, &spec, *depth, *milestones, &base.ctx)?;
                emit(g, out, &result, || {
                    csv_rows(result.milestones.iter().map(|m| (m.depth, decimal_string(&m.gap))))
                        .map(|body| format!("depth,gap\n{body}"))
                })
            }
        },
        Command::Prefixes { action } => match action {
            PrefixAction::List(a) => {
                let base = a.beta.resolve(g, a.n, err)?;
                let x = parse_x(&a.x, &base.ctx)?;
                let set = enumerate_prefixes(&x, a.n, &base.ctx)?;
                emit(g, out, &set, || csv_rows(&set.entries))
            }
            PrefixAction::Count(a) => {
                let base = a.beta.resolve(g, a.n, err)?;
                let x = parse_x(&a.x, &base.ctx)?;
                let count = count_prefixes(&x, a.n, &base.ctx)?;
                let o = CountOutput { x: decimal_string(&x), n: a.n, beta: &base.label, count };
                emit(g, out, &o, || csv_rows([&o]))
            }
        },
        Command::Mingap { beta, x, n } => {
            let base = beta.resolve(g, *n, err)?;
            let x = parse_x(x, &base.ctx)?;
            let best = min_gap(&x, *n, &base.ctx)?;
            let o = MinGapOutput {
                x: decimal_string(&x),
                n: *n,
                gap: decimal_string(&best.gap),
                digits: best.digits.to_string(),
            };
            emit(g, out, &o, || csv_rows([&o]))
        }
        Command::Hits { beta, psi, x, n_lo, n_hi, two_sided } => {
            let base = beta.resolve(g, *n_hi, err)?;
            let spec = psi.build(Some(&base))?;
            let x = parse_x(x, &base.ctx)?;
            let mode = if *two_sided { HitMode::TwoSided } else { HitMode::OneSided };
            let scans = scan_levels(&x, &spec, *n_lo, *n_hi, mode, &base.ctx)?;
            let hits: Vec<HitRow> = scans.iter().filter_map(|s| s.record.as_ref()).map(HitRow::from).collect();
            emit(g, out, &hits, || Ok(scan_csv(&scans)?))
        }
        Command::Coverage { beta, psi, n_lo, n_hi, samples, two_sided, plot_data } => {
            let bases = beta.resolve_all(g, *n_hi, err)?;
            let mode = if *two_sided { HitMode::TwoSided } else { HitMode::OneSided };
            let mut reports = Vec::new();
            for base in &bases {
                let spec = psi.build(Some(base))?;
                let exp = CoverageExperiment::new(base.label.clone(), spec, *n_lo, *n_hi, *samples, g.seed).with_mode(mode);
                reports.push(exp.run(&base.ctx)?);
            }
            if *plot_data {
                for r in &reports {
                    if reports.len() > 1 {
                        writeln!(out, "# {}", r.beta_label)?;
                    }
                    out.write_all(plot_data_csv(r)?.as_bytes())?;
                }
                return Ok(());
            }
            let summary = contrast_summary(&reports);
            if reports.len() == 1 {
                emit(g, out, &reports[0], || Ok(summary_csv(&summary)?))
            } else {
                #[derive(Serialize)]
                struct Contrast<'a, R, S> {
                    reports: &'a [R],
                    summary: &'a [S],
                }
                emit(g, out, &Contrast { reports: &reports, summary: &summary }, || Ok(summary_csv(&summary)?))
            }
        }
        Command::Density { method } => match method {
            DensityCommand::Prefix { beta, n, grid } => {
                let base = beta.resolve(g, *n, err)?;
                let est = estimate_density_prefix(&base.ctx, *n, *grid)?;
                emit(g, out, &est, || Ok(est.to_csv()?))
            }
            DensityCommand::Mc { beta, samples, bins, depth } => {
                let base = beta.resolve(g, 0, err)?;
                let est = estimate_density_mc(&base.ctx, *samples, *bins, g.seed, *depth)?;
                emit(g, out, &est, || Ok(est.to_csv()?))
            }
            DensityCommand::Compare { beta, n, grid, samples, bins } => {
                let base = beta.resolve(g, *n, err)?;
                let prefix = estimate_density_prefix(&base.ctx, *n, *grid)?;
                let mc = estimate_density_mc(&base.ctx, *samples, *bins, g.seed, None)?;
                let d = compare_densities(&prefix, &mc)?;
                emit(g, out, &d, || csv_rows([&d]))
            }
        },
        Command::Unique { beta, x, n } => {
            let base = beta.resolve(g, *n, err)?;
            let x = parse_x(x, &base.ctx)?;
            let verdict = unique_to_depth(&x, *n, &base.ctx)?;
            let o = UniqueOutput { x: decimal_string(&x), n: *n, verdict };
            emit(g, out, &o, || {
                let depth = match verdict {
                    UniquenessVerdict::BranchesAt { branch_depth } => branch_depth.to_string(),
                    UniquenessVerdict::UniqueToDepth { .. } => String::new(),
                };
                let status = serde_json::to_value(verdict)?["status"].as_str().unwrap_or_default().to_string();
                csv_rows([(o.x.clone(), o.n, status, depth)]).map(|b| format!("x,n,status,branch_depth\n{b}"))
            })
        }
        Command::Psi { action } => {
            let (beta, psi) = match action {
                PsiCommand::Eval { beta, psi, .. } | PsiCommand::Decay { beta, psi, .. } | PsiCommand::Sum { beta, psi, .. } => {
                    (beta, psi)
                }
            };
            let base = if psi.needs_base() { Some(beta.resolve(g, 0, err)?) } else { None };
            let spec = psi.build(base.as_ref())?;
            match action {
                PsiCommand::Eval { n, .. } => {
                    if *n == 0 {
                        bail!(Error::InvalidArgument("n must be at least 1".into()));
                    }
                    let o = PsiValue { psi: spec.clone(), n: *n, value: decimal_string(&psi_eval(&spec, *n)) };
                    emit(g, out, &o, || csv_rows([(o.n, o.value.clone())]).map(|b| format!("n,value\n{b}")))
                }
                PsiCommand::Decay { m, n_max, .. } => {
                    let c = decay_constant(&spec, *m, *n_max)?;
                    let o = DecayOutput { psi: spec, m: *m, n_max: *n_max, c_m: c.to_string() };
                    emit(g, out, &o, || csv_rows([(o.m, o.n_max, o.c_m.clone())]).map(|b| format!("m,n_max,c_m\n{b}")))
                }
                PsiCommand::Sum { n, .. } => {
                    let s = divergence_partial_sum(&spec, *n)?;
                    emit(g, out, &s, || csv_rows([&s]))
                }
            }
        }
        Command::Growth { beta, x, depths } => {
            let deepest = depths.iter().copied().max().unwrap_or(0);
            let base = beta.resolve(g, deepest, err)?;
            let x = parse_x(x, &base.ctx)?;
            let d = growth_diagnostic(&x, &base.ctx, depths).context("growth diagnostic")?;
            emit(g, out, &d, || csv_rows(d.ratios.iter().copied()).map(|b| format!("n,ratio\n{b}")))
        }
    }
}
