use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use serde_json::{json, Value};

use weyl_core::bounds::{self, BoundReport, ExtremalCheck};
use weyl_core::discrepancy;
use weyl_core::extremal::{self, ExtremalConfig};
use weyl_core::products::{self, Magnitude, Normalizer};
use weyl_core::sequences::{self, PointSet};
use weyl_core::stochastic::{self, PathStatistics};
use weyl_core::{IrrationalSpec, Precision};

#[derive(Parser)]
#[command(name = "weyl", version, about = "Trigonometric Weyl products, discrepancy and bound checks")]
struct Cli {
    /// Binary places for fractional parts {n alpha}.
    #[arg(long, global = true, env = "WEYL_PRECISION_BITS", default_value_t = 128)]
    precision_bits: u32,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Generator {
    Kronecker,
    Vdc,
    Grid,
    Random,
    Lacunary,
    Extremal,
}

#[derive(Args, Clone)]
struct GenArgs {
    #[arg(long = "gen", value_enum, default_value = "kronecker")]
    generator: Generator,
    #[arg(long, default_value = "sqrt2m1")]
    alpha: String,
    /// Number of points.
    #[arg(long = "N", visible_alias = "N-max", default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Target discrepancy of the extremal set, as `M/N` or a decimal.
    #[arg(long)]
    d: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a point set as `index,value`.
    Points(GenArgs),
    /// Star discrepancy of a point set, or its per-prefix trace.
    Discrepancy {
        #[command(flatten)]
        gen: GenArgs,
        /// Emit `N,d_star,delta` for every prefix.
        #[arg(long)]
        trace: bool,
    },
    /// Per-prefix log products `N,logP,P_over_norm`.
    Product {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, default_value = "none")]
        normalizer: String,
    },
    /// The extremal set for `(N, d)` with its closed form and bounds, or a
    /// sweep over even `N <= N-max`.
    Extremal {
        #[arg(long = "N", default_value_t = 100)]
        n: u64,
        #[arg(long, default_value = "1/20")]
        d: String,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Sweep all even `N <= N-max` with `M <= N/8` instead.
        #[arg(long = "sweep-N-max")]
        sweep_n_max: Option<u64>,
    },
    /// Figure series `N,value` of `P_N` or a normalized `P_N`.
    Figure {
        #[arg(long, default_value = "sqrt2m1")]
        alpha: String,
        #[arg(long = "N-max", visible_alias = "N", default_value_t = 500)]
        n_max: usize,
        #[arg(long, default_value = "none")]
        normalizer: String,
    },
    /// Run one checker; exit 0 when it passes, 1 on a violation.
    Verify(VerifyArgs),
    /// Monte Carlo experiments.
    Mc(McArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Theorem {
    Hlawka,
    Extremal,
    KroneckerSandwich,
    Ostrowski,
    Cesaro,
    TypeGrowth,
    VdcLimits,
    Conjectures,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    theorem: Theorem,
    #[arg(long, default_value = "sqrt2m1")]
    alpha: String,
    /// Point set for `hlawka`.
    #[arg(long = "gen", value_enum, default_value = "kronecker")]
    generator: Generator,
    #[arg(long = "N", visible_alias = "N-max", default_value_t = 10_000)]
    n: usize,
    #[arg(long = "N-min", default_value_t = 16)]
    n_min: usize,
    #[arg(long = "q-max", default_value_t = 100_000)]
    q_max: u128,
    #[arg(long = "s-max", default_value_t = 18)]
    s_max: u32,
    #[arg(long, default_value_t = 1.01)]
    t: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random sets per configuration in the extremal sup search.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    Iid,
    Rademacher,
    Subsequence,
}

#[derive(Args)]
struct McArgs {
    #[arg(value_enum)]
    model: Model,
    #[arg(long, default_value = "sqrt2m1")]
    alpha: String,
    #[arg(long, default_value_t = 50)]
    paths: usize,
    /// Path length (selected terms for `subsequence`).
    #[arg(long = "N", visible_alias = "N-max", default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Summary JSON path, when the CSV goes to `--out`.
    #[arg(long)]
    summary: Option<PathBuf>,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Violation,
    Usage(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.into())
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn output(path: Option<&PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(path: Option<&PathBuf>, v: &Value) -> anyhow::Result<()> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn parse_alpha(s: &str) -> anyhow::Result<IrrationalSpec> {
    s.parse::<IrrationalSpec>().map_err(Into::into)
}

fn precision(bits: u32, n: usize) -> anyhow::Result<Precision> {
    Ok(Precision::new(bits, n.max(1) as u64)?)
}

/// `M/N` or a terminating decimal.
fn parse_ratio(s: &str) -> anyhow::Result<Ratio<u64>> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        if b == 0 {
            bail!("zero denominator in {s}");
        }
        return Ok(Ratio::new(a, b));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 18 || !frac.chars().all(|c| c.is_ascii_digit()) {
        bail!("cannot read {s} as a rational");
    }
    let den = 10u64.pow(frac.len() as u32);
    let int: u64 = if int.is_empty() { 0 } else { int.parse()? };
    let frac: u64 = if frac.is_empty() { 0 } else { frac.parse()? };
    Ok(Ratio::new(int * den + frac, den))
}

fn build(gen: &GenArgs, bits: u32) -> anyhow::Result<PointSet> {
    let n = gen.n;
    Ok(match gen.generator {
        Generator::Kronecker => sequences::kronecker(&parse_alpha(&gen.alpha)?, n, &precision(bits, n)?)?,
        Generator::Vdc => sequences::van_der_corput(n),
        Generator::Grid => sequences::uniform_grid(n),
        Generator::Random => sequences::random_uniform(n, gen.seed),
        Generator::Lacunary => sequences::lacunary(&parse_alpha(&gen.alpha)?, n, bits)?,
        Generator::Extremal => {
            let d = gen.d.as_deref().context("--d is required for the extremal set")?;
            extremal::build_extremal(&ExtremalConfig::from_d(n as u64, parse_ratio(d)?)?)
        }
    })
}

fn run(cli: &Cli) -> CmdResult {
    let out = cli.out.as_ref();
    let bits = cli.precision_bits;
    let json_out = cli.format == Some(Format::Json);
    match &cli.command {
        Command::Points(gen) => {
            let ps = build(gen, bits)?;
            if json_out {
                let pts: Vec<String> = ps.points.iter().map(|p| p.to_decimal(40)).collect();
                write_json(out, &json!({"provenance": ps.provenance.tag(), "params": ps.params, "points": pts}))?;
            } else {
                let mut w = output(out)?;
                ps.write_csv(&mut w)?;
                w.flush()?;
            }
        }
        Command::Discrepancy { gen, trace } => {
            let ps = build(gen, bits)?;
            if *trace {
                let t = discrepancy::discrepancy_trace(&ps)?;
                let mut w = output(out)?;
                discrepancy::write_trace_csv(&t, &mut w)?;
                w.flush()?;
            } else {
                let r = discrepancy::star_discrepancy(&ps)?;
                let exact = r.exact.map(|e| e.to_string());
                write_json(
                    out,
                    &json!({
                        "N": r.n,
                        "d_star": r.d_star,
                        "delta": r.delta,
                        "exact": exact,
                        "argmax_anchor": r.argmax_anchor.to_decimal(40),
                        "from_above": r.from_above,
                        "error_bound": r.error_bound,
                    }),
                )?;
            }
        }
        Command::Product { gen, normalizer } => {
            let normalizer: Normalizer = normalizer.parse()?;
            let ps = build(gen, bits)?;
            let trace = products::product_trace(&ps);
            if json_out {
                let last = trace.last().context("empty point set")?;
                let norm = products::normalized_trace(&trace, normalizer);
                write_json(
                    out,
                    &json!({
                        "N": trace.len(),
                        "logP": weyl_core::point::dd_to_decimal(last, 32),
                        "error_bound": trace.error_bound(),
                        "zero_at": trace.zero_at,
                        "normalizer": normalizer.tag(),
                        "P_over_norm": norm.last().map(|m| m.to_string()),
                    }),
                )?;
            } else {
                let mut w = output(out)?;
                products::write_trace_csv(&trace, normalizer, &mut w)?;
                w.flush()?;
            }
        }
        Command::Extremal { n, d, epsilon, sweep_n_max } => {
            if let Some(n_max) = sweep_n_max {
                let configs: Vec<ExtremalConfig> = (8..=*n_max)
                    .step_by(2)
                    .flat_map(|n| (1..=n / 8).map(move |m| ExtremalConfig::new(n, m)))
                    .collect::<Result<_, _>>()?;
                let rows = extremal::sweep(&configs, *epsilon)?;
                let mut w = output(out)?;
                extremal::write_sweep_csv(&rows, &mut w)?;
                w.flush()?;
            } else {
                let cfg = ExtremalConfig::from_d(*n, parse_ratio(d)?)?;
                let closed = extremal::extremal_product_closed_form(&cfg).to_f64();
                let direct = extremal::extremal_product_direct(&cfg).to_f64();
                let disc = discrepancy::star_discrepancy(&extremal::build_extremal(&cfg))?;
                let (b, log_c) = extremal::upper_bound_constant(*epsilon)?;
                write_json(
                    out,
                    &json!({
                        "N": cfg.n(),
                        "M": cfg.m(),
                        "d": cfg.d().to_string(),
                        "star_discrepancy": disc.exact.map(|e| e.to_string()),
                        "logP_closed_form": closed,
                        "logP_direct": direct,
                        "logLower": extremal::theorem2_lower_bound(cfg.n(), cfg.d_f64())?,
                        "logUpper": extremal::theorem2_upper_bound(cfg.n(), cfg.d_f64(), *epsilon)?,
                        "epsilon": epsilon,
                        "B_epsilon": b,
                        "log_c_epsilon": log_c,
                    }),
                )?;
            }
        }
        Command::Figure { alpha, n_max, normalizer } => {
            let normalizer: Normalizer = normalizer.parse()?;
            let alpha = parse_alpha(alpha)?;
            let trace = bounds::kronecker_trace(&alpha, *n_max, &precision(bits, *n_max)?)?;
            let mut w = output(out)?;
            writeln!(w, "N,value")?;
            for (i, m) in products::normalized_trace(&trace, normalizer).into_iter().enumerate() {
                match m {
                    Magnitude::Linear(v) => writeln!(w, "{},{v:e}", i + 1)?,
                    Magnitude::Log(l) => writeln!(w, "{},exp({l})", i + 1)?,
                }
            }
            w.flush()?;
        }
        Command::Verify(args) => return verify(args, bits, out),
        Command::Mc(args) => return mc(args, cli.format, out),
    }
    Ok(())
}

fn verify(a: &VerifyArgs, bits: u32, out: Option<&PathBuf>) -> CmdResult {
    let report: BoundReport = match a.theorem {
        Theorem::Hlawka => {
            if a.generator == Generator::Grid {
                bounds::check_hlawka_grid(a.n)?
            } else {
                let gen = GenArgs {
                    generator: a.generator,
                    alpha: a.alpha.clone(),
                    n: a.n,
                    seed: a.seed,
                    d: None,
                };
                let ps = build(&gen, bits)?;
                let trace = products::product_trace(&ps);
                let d = discrepancy::discrepancy_trace(&ps)?;
                bounds::check_hlawka(&trace, &d, a.n_min)?.param("gen", ps.provenance.tag())
            }
        }
        Theorem::Extremal => bounds::check_extremal(&ExtremalCheck {
            n_max: a.n.min(1024) as u64,
            epsilon: a.epsilon,
            sup_samples: a.samples,
            seed: a.seed,
            ..ExtremalCheck::default()
        })?,
        Theorem::KroneckerSandwich => {
            let alpha = parse_alpha(&a.alpha)?;
            let qs = bounds::denominators_up_to(&alpha, a.q_max)?;
            bounds::check_kronecker_sandwich(&alpha, &qs, &precision(bits, a.q_max as usize)?)?
        }
        Theorem::Ostrowski => {
            let alpha = parse_alpha(&a.alpha)?;
            bounds::check_ostrowski_bound(&alpha, a.n, &precision(bits, a.n)?)?
        }
        Theorem::Cesaro => {
            let alpha = parse_alpha(&a.alpha)?;
            bounds::check_cesaro_log_bound(&alpha, a.n, &precision(bits, a.n)?)?
        }
        Theorem::TypeGrowth => {
            let alpha = parse_alpha(&a.alpha)?;
            bounds::check_type_growth(&alpha, a.n, a.t, &precision(bits, a.n)?)?
        }
        Theorem::VdcLimits => bounds::check_vdc_limits(a.s_max)?,
        Theorem::Conjectures => {
            let alpha = parse_alpha(&a.alpha)?;
            bounds::check_kronecker_conjectures(&alpha, a.n, &precision(bits, a.n)?)?
        }
    };
    write_json(out, &serde_json::to_value(&report)?)?;
    if report.passed || report.evidence_only {
        Ok(())
    } else {
        Err(Failure::Violation)
    }
}

fn mc(a: &McArgs, format: Option<Format>, out: Option<&PathBuf>) -> CmdResult {
    let stats: PathStatistics = match a.model {
        Model::Iid => stochastic::iid_lil_experiment(a.paths, a.n, a.seed)?,
        Model::Rademacher => stochastic::rademacher_lil_experiment(&parse_alpha(&a.alpha)?, a.paths, a.n, a.seed)?,
        Model::Subsequence => {
            stochastic::subsequence_product_experiment(&parse_alpha(&a.alpha)?, a.paths, a.n, a.seed)?
        }
    };
    let mut summary = stats.summary_json();
    if a.model != Model::Iid {
        summary["alpha"] = a.alpha.clone().into();
    }
    if format == Some(Format::Json) {
        write_json(out, &summary)?;
    } else {
        let mut w = output(out)?;
        stats.write_csv(&mut w)?;
        w.flush()?;
        if let Some(p) = &a.summary {
            write_json(Some(p), &summary)?;
        }
    }
    Ok(())
}
