//! Command-line front end. The `tsfp` binary is a thin wrapper around [`run`].
//!
//! Every subcommand is a function of its arguments and the seed: sample `i`
//! always uses substream `i`, so `--threads` only changes the speed.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::apps::{fpde_biased_baseline, fpde_estimate, price_barrier, price_rows_csv, BarrierOptionSpec, FpdeSpec};
use crate::boundary::Boundary;
use crate::bv::BVProcessSpec;
use crate::error::{Error, Result};
use crate::parallel::{default_threads, map_streams};
use crate::params::{Precision, TemperedParams};
use crate::passage::{tsffp_sample_with, PassageOptions};
use crate::rng::RngStream;
use crate::undershoot::UndershootContext;
use crate::validation::{
    bench_csv, bench_sweep, invariant_grid_suite, ks_two_sample, stable_quantile, BenchTarget, DirectPsiSampler,
    PsiComponent,
};
use crate::variates::{sample_stable_ln, sample_tempered_stable_ln};
use crate::zolotarev::Kernel;

/// Environment variable read for the default seed.
pub const SEED_ENV: &str = "TSFP_SEED";

#[derive(Debug, Parser)]
#[command(name = "tsfp", version, about = "Exact first-passage simulation for tempered stable subordinators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw marginals or first-passage triplets.
    Sample(SampleArgs),
    /// Price an up-and-out barrier call over a grid of initial values.
    Price(PriceArgs),
    /// Monte Carlo solution of the time-fractional PDE.
    Fpde(FpdeArgs),
    /// Mean work counters over a parameter grid.
    Bench(BenchArgs),
    /// Run the inequality suite or the direct-inversion KS comparison.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// `S_t` of the stable subordinator (`--q` is ignored).
    Stable,
    /// `S_t` of the tempered stable subordinator.
    Tempered,
    /// First-passage triplet over `--barrier`.
    Fpt,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed; defaults to the TSFP_SEED environment variable, then 0.
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output bits of the numerical inversions.
    #[arg(long, default_value_t = 53, value_parser = clap::value_parser!(u32).range(8..=64))]
    pub precision: u32,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

impl Common {
    fn threads(&self) -> usize {
        self.threads.unwrap_or_else(default_threads).max(1)
    }

    fn options(&self) -> Result<PassageOptions> {
        Ok(PassageOptions { precision: Precision::new(self.precision)?, ..PassageOptions::default() })
    }
}

fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    let a: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if a > 0.0 && a < 1.0 {
        Ok(a)
    } else {
        Err(format!("alpha in (0,1) required, got {a}"))
    }
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("value must be positive and finite, got {v}"))
    }
}

fn parse_nonnegative(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("q >= 0 required, got {v}"))
    }
}

/// Parses `const:<b>`, `linear:<a0>,<a1>` (for `b(t) = a0 − a1 t`) or
/// `file:<path>` (a `t,b` knot CSV).
pub fn parse_barrier(s: &str) -> Result<Boundary> {
    let (kind, rest) =
        s.split_once(':').ok_or_else(|| Error::Parse(format!("barrier descriptor {s:?} lacks a kind")))?;
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{x:?}: {e}")));
    match kind {
        "const" => Boundary::constant(num(rest)?),
        "linear" => {
            let (a0, a1) = rest.split_once(',').ok_or_else(|| Error::Parse("linear barrier needs a0,a1".into()))?;
            Boundary::linear(num(a0)?, num(a1)?)
        }
        "file" => Boundary::from_csv_file(rest),
        _ => Err(Error::Parse(format!("unknown barrier kind {kind:?}; use const, linear or file"))),
    }
}

fn barrier_arg(s: &str) -> std::result::Result<String, String> {
    parse_barrier(s).map(|_| s.to_string()).map_err(|e| e.to_string())
}

/// Parses `alpha,theta,q`.
fn parse_triple(s: &str) -> std::result::Result<TemperedParams, String> {
    let v: Vec<&str> = s.split(',').collect();
    if v.len() != 3 {
        return Err("expected alpha,theta,q".into());
    }
    let a = parse_alpha(v[0])?;
    let th = parse_positive(v[1])?;
    let q = parse_nonnegative(v[2])?;
    TemperedParams::new(a, th, q).map_err(|e| e.to_string())
}

/// A list of grid values.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

/// Parses `start:stop:step` (inclusive of `stop` up to rounding) or a comma list.
fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    if let [a, b, h] = s.split(':').collect::<Vec<_>>()[..] {
        let (a, b, h) = (num(a)?, num(b)?, num(h)?);
        if !(h > 0.0) || !(b >= a) {
            return Err("grid needs start <= stop and step > 0".into());
        }
        let n = ((b - a) / h + 1e-9).floor() as usize;
        return Ok(Grid((0..=n).map(|i| a + i as f64 * h).collect()));
    }
    s.split(',').map(num).collect::<std::result::Result<_, _>>().map(Grid)
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, value_enum, default_value_t = Kind::Fpt)]
    pub kind: Kind,
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.0, value_parser = parse_nonnegative)]
    pub q: f64,
    /// `const:<b>`, `linear:<a0>,<a1>` or `file:<path>`.
    #[arg(long, default_value = "const:1", value_parser = barrier_arg)]
    pub barrier: String,
    /// Time of the marginal draws.
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    pub t: f64,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PriceArgs {
    /// Parameters of the upward component, `alpha,theta,q`.
    #[arg(long, default_value = "0.66,0.1305,6.5022", value_parser = parse_triple)]
    pub plus: TemperedParams,
    /// Parameters of the downward component, `alpha,theta,q`.
    #[arg(long, default_value = "0.66,0.0615,3.3088", value_parser = parse_triple)]
    pub minus: TemperedParams,
    #[arg(long, default_value_t = 98.0)]
    pub strike: f64,
    #[arg(long, default_value_t = 102.0)]
    pub barrier: f64,
    /// Maturity in years.
    #[arg(long, default_value_t = 14.0 / 365.0, value_parser = parse_positive)]
    pub maturity: f64,
    #[arg(long, default_value_t = 0.0)]
    pub discount: f64,
    /// Initial values, `start:stop:step` or a comma list.
    #[arg(long, default_value = "98:101.999:0.031", value_parser = parse_grid)]
    pub r0: Grid,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct FpdeArgs {
    #[arg(long, default_value_t = 0.4, value_parser = parse_alpha)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    pub theta: f64,
    #[arg(long, default_value_t = 1.0, value_parser = parse_nonnegative)]
    pub q: f64,
    #[arg(long = "t-grid", default_value = "0.05:1:0.05", value_parser = parse_grid)]
    pub t_grid: Grid,
    #[arg(long = "x-grid", default_value = "0.01:1:0.01", value_parser = parse_grid)]
    pub x_grid: Grid,
    /// Use the random-walk baseline with this step instead of exact times.
    #[arg(long, value_parser = parse_positive)]
    pub mesh: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchKind {
    /// Stable passage over `b ≡ level`, grid over alpha.
    Sfp,
    /// Fast tempered passage over `b ≡ level`, grid over q.
    Tsffp,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = BenchKind::Sfp)]
    pub target: BenchKind,
    /// Grid of alpha (sfp) or q (tsffp); defaults cover the usual sweeps.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<Grid>,
    /// Alpha for the tsffp sweep.
    #[arg(long, default_value_t = 0.55, value_parser = parse_alpha)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    pub theta: f64,
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    pub level: f64,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Deterministic inequality grid checks.
    Invariants,
    /// KS of the undershoot marginal samplers against direct inversion.
    Ks,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = Suite::Invariants)]
    pub suite: Suite,
    /// Sample size per KS comparison.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// KS significance level.
    #[arg(long, default_value_t = 0.001)]
    pub level: f64,
    #[command(flatten)]
    pub common: Common,
}

/// CSV header and rows rendered either as CSV or as a JSON array with one
/// object per row.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn from_csv(text: &str) -> Table {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("").split(',').map(str::to_string).collect();
        let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
        Table { header, rows }
    }

    fn render(&self, fmt: Format) -> String {
        match fmt {
            Format::Csv => {
                let mut s = self.header.join(",");
                s.push('\n');
                for r in &self.rows {
                    s.push_str(&r.join(","));
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let objs: Vec<serde_json::Map<String, serde_json::Value>> = self
                    .rows
                    .iter()
                    .map(|r| self.header.iter().zip(r).map(|(h, v)| (h.clone(), cell_json(v))).collect())
                    .collect();
                let mut s = serde_json::to_string_pretty(&objs).unwrap_or_default();
                s.push('\n');
                s
            }
        }
    }
}

fn cell_json(v: &str) -> serde_json::Value {
    if let Ok(b) = v.parse::<bool>() {
        return serde_json::Value::Bool(b);
    }
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => serde_json::json!(x),
        _ => serde_json::Value::String(v.to_string()),
    }
}

fn emit(common: &Common, csv: &str) -> Result<()> {
    let text = Table::from_csv(csv).render(common.format);
    match &common.output {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Error::Io(e.to_string())),
    }
}

fn cmd_sample(a: &SampleArgs) -> Result<String> {
    let tp = TemperedParams::new(a.alpha, a.theta, a.q)?;
    let k = Kernel::new(a.alpha)?;
    let opts = a.common.options()?;
    let rng = RngStream::from_seed(a.common.seed);
    let threads = a.common.threads();
    let mut out = String::new();
    match a.kind {
        Kind::Stable | Kind::Tempered => {
            let stable = a.kind == Kind::Stable;
            let (xs, _) = map_streams(a.n, threads, &rng, |_, r| {
                if stable {
                    Ok(sample_stable_ln(&k, a.theta, a.t, r).exp())
                } else {
                    Ok(sample_tempered_stable_ln(&tp, &k, a.t, r, opts.precision)?.exp())
                }
            })?;
            out.push_str("value\n");
            for x in xs {
                out.push_str(&format!("{x}\n"));
            }
        }
        Kind::Fpt => {
            let b = parse_barrier(&a.barrier)?;
            let (tris, _) = map_streams(a.n, threads, &rng, |_, r| tsffp_sample_with(&tp, &k, &b, &opts, r))?;
            out.push_str("tau,undershoot,value,crept\n");
            for t in tris {
                out.push_str(&format!("{},{},{},{}\n", t.tau, t.pre, t.post_value, t.crept));
            }
        }
    }
    Ok(out)
}

fn cmd_price(a: &PriceArgs) -> Result<String> {
    let spec = BarrierOptionSpec {
        process: BVProcessSpec::new(a.plus, a.minus),
        r0: a.r0.0.first().copied().unwrap_or(100.0),
        strike: a.strike,
        barrier: a.barrier,
        maturity: a.maturity,
        discount: a.discount,
    };
    let rng = RngStream::from_seed(a.common.seed);
    let (rows, _) = price_barrier(&spec, a.n, &rng, Some(&a.r0.0), a.common.threads())?;
    Ok(price_rows_csv(&rows))
}

fn cmd_fpde(a: &FpdeArgs) -> Result<String> {
    let tp = TemperedParams::new(a.alpha, a.theta, a.q)?;
    let spec = FpdeSpec::new(tp, a.t_grid.0.clone(), a.x_grid.0.clone(), a.n)?;
    let rng = RngStream::from_seed(a.common.seed);
    let res = match a.mesh {
        Some(h) => fpde_biased_baseline(&spec, h, &rng, a.common.threads())?,
        None => fpde_estimate(&spec, &rng, a.common.threads())?,
    };
    Ok(res.to_csv())
}

fn cmd_bench(a: &BenchArgs) -> Result<String> {
    let (target, default): (BenchTarget, Vec<f64>) = match a.target {
        BenchKind::Sfp => (
            BenchTarget::Sfp { theta: a.theta, level: a.level },
            vec![0.001, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999],
        ),
        BenchKind::Tsffp => (
            BenchTarget::Tsffp { alpha: a.alpha, theta: a.theta, level: a.level },
            (0..=11).map(|i| (i as f64).exp()).collect(),
        ),
    };
    let grid = a.grid.clone().map_or(default, |g| g.0);
    let rng = RngStream::from_seed(a.common.seed);
    let rows = bench_sweep(target, &grid, a.n, &rng, a.common.threads())?;
    Ok(bench_csv(&rows))
}

/// Returns the CSV and whether every check passed.
fn cmd_validate(a: &ValidateArgs) -> Result<(String, bool)> {
    match a.suite {
        Suite::Invariants => {
            let rep = invariant_grid_suite()?;
            Ok((rep.to_csv(), rep.passed()))
        }
        Suite::Ks => {
            let rng = RngStream::from_seed(a.common.seed);
            let mut cases = Vec::new();
            for &alpha in &[0.1, 0.3, 0.5, 0.7, 0.9] {
                for &p in &[0.5, 0.99] {
                    for which in [PsiComponent::First, PsiComponent::Second] {
                        cases.push((alpha, p, which));
                    }
                }
            }
            let n = a.n;
            let per_case = |i: usize, r: &mut RngStream| -> Result<String> {
                let (alpha, p, which) = cases[i];
                let s = stable_quantile(p, alpha)?;
                let ctx = UndershootContext::new(s, alpha)?;
                let direct = DirectPsiSampler::new(which, &ctx)?;
                let mut xs = Vec::with_capacity(n);
                let mut ys = Vec::with_capacity(n);
                for _ in 0..n {
                    xs.push(direct.sample(r)?);
                    ys.push(match which {
                        PsiComponent::First => ctx.sample_psi1_y(r)?,
                        PsiComponent::Second => ctx.sample_psi2_y(r)?.0,
                    });
                }
                let ks = ks_two_sample(&xs, &ys)?;
                let name = match which {
                    PsiComponent::First => "psi1",
                    PsiComponent::Second => "psi2",
                };
                Ok(format!(
                    "{name}_alpha{alpha}_q{p},{},{},{},{},{}",
                    ks.n,
                    ks.m,
                    ks.statistic,
                    ks.p_value,
                    ks.passes(a.level)
                ))
            };
            let (rows, _) = map_streams(cases.len(), a.common.threads(), &rng, per_case)?;
            let ok = rows.iter().all(|r| r.ends_with("true"));
            let mut s = String::from("test,n,m,D,p,pass\n");
            for r in rows {
                s.push_str(&r);
                s.push('\n');
            }
            Ok((s, ok))
        }
    }
}

/// Runs the parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Sample(a) => cmd_sample(a).and_then(|s| emit(&a.common, &s)).map(|_| true),
        Command::Price(a) => cmd_price(a).and_then(|s| emit(&a.common, &s)).map(|_| true),
        Command::Fpde(a) => cmd_fpde(a).and_then(|s| emit(&a.common, &s)).map(|_| true),
        Command::Bench(a) => cmd_bench(a).and_then(|s| emit(&a.common, &s)).map(|_| true),
        Command::Validate(a) => cmd_validate(a).and_then(|(s, ok)| emit(&a.common, &s).map(|_| ok)),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e @ (Error::Domain(_) | Error::Parse(_))) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}
