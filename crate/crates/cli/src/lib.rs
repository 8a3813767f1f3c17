//! Command-line front end for `sparsecov`.
//!
//! Artifacts go to stdout or `--out`; summaries and progress go to stderr.
//! Test commands exit with 0 (no rejection), 3 (rejection) or 1 (error).

mod grid;
pub mod verify;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sparsecov::bootstrap::{one_sample_test, spherical_intervals, two_sample_test, SphericalReport};
use sparsecov::io::{self, Artifact, DataFormat, Provenance, RunArtifact};
use sparsecov::simulate::{density_study_spherical, DensityConfig, DensityTable};
use sparsecov::stats::sparsity_warning;
use sparsecov::{BootstrapConfig, Dataset, SolverChoice, TestReport};

pub use grid::{GridScale, SimulateArgs};

pub const EXIT_ACCEPT: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_REJECT: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "sparsecov", version, about = "Sparse restricted spectral tests for covariance matrices")]
pub struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (default: all logical cores). Results do not depend on it.
    #[arg(long, global = true, value_parser = parse_count)]
    pub threads: Option<u64>,

    /// Output file (test commands) or directory (simulate, density).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Artifact format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test equality of two covariance matrices.
    TwoSample(TwoSampleArgs),
    /// Test a sample against a hypothesized covariance.
    OneSample(OneSampleArgs),
    /// Run a size/power grid.
    Simulate(SimulateArgs),
    /// Compare the law of the top sample eigenvalue with two bootstraps.
    Density(DensityArgs),
    /// Run a verification suite.
    Verify(verify::VerifyArgs),
}

pub(crate) fn parse_alpha(s: &str) -> Result<f64, String> {
    let a: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if a > 0.0 && a < 1.0 {
        Ok(a)
    } else {
        Err(format!("alpha must lie in (0, 1), got {a}"))
    }
}

/// Positive integer flag (sparsity, replicate counts).
pub(crate) fn parse_count(s: &str) -> Result<u64, String> {
    let v: u64 = s.parse().map_err(|e| format!("{e}"))?;
    if v >= 1 {
        Ok(v)
    } else {
        Err("must be at least 1".into())
    }
}

fn parse_solver(s: &str) -> Result<SolverChoice, String> {
    s.parse().map_err(|e: sparsecov::Error| e.to_string())
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a positive number, got {v}"))
    }
}

#[derive(Debug, Args, Serialize)]
pub struct TwoSampleArgs {
    /// First sample (CSV, or JSON with n/d/rows).
    #[arg(long)]
    pub x: PathBuf,
    /// Second sample.
    #[arg(long)]
    pub y: PathBuf,
    /// Sparsity level.
    #[arg(long, value_parser = parse_count)]
    pub s: u64,
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    pub alpha: f64,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = 1000, value_parser = parse_count)]
    pub boot: u64,
    /// brute, greedy or tpm (default: brute when cheap, greedy otherwise).
    #[arg(long, value_parser = parse_solver)]
    pub solver: Option<SolverChoice>,
    /// Subtract column means before testing.
    #[arg(long)]
    pub center: bool,
}

#[derive(Debug, Args, Serialize)]
#[command(group = clap::ArgGroup::new("null").required(true).args(["sigma", "spherical"]))]
pub struct OneSampleArgs {
    /// Sample (CSV, or JSON with n/d/rows).
    #[arg(long)]
    pub x: PathBuf,
    /// Hypothesized covariance matrix (CSV or JSON).
    #[arg(long)]
    pub sigma: Option<PathBuf>,
    /// Hypothesized variance of a spherical covariance; reports eigenvalue intervals.
    #[arg(long, value_parser = parse_positive)]
    pub spherical: Option<f64>,
    /// Sparsity level (not used with --spherical).
    #[arg(long, required_unless_present = "spherical", value_parser = parse_count)]
    pub s: Option<u64>,
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    pub alpha: f64,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = 1000, value_parser = parse_count)]
    pub boot: u64,
    /// Use the unnormalized statistic.
    #[arg(long)]
    pub plain: bool,
    /// brute, greedy or tpm (default: brute when cheap, greedy otherwise).
    #[arg(long, value_parser = parse_solver)]
    pub solver: Option<SolverChoice>,
    /// Subtract column means before testing.
    #[arg(long)]
    pub center: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct DensityArgs {
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [200usize, 500, 1000])]
    pub n: Vec<usize>,
    /// Dimensions, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 4, 10, 20, 50, 100])]
    pub d: Vec<usize>,
    /// Monte Carlo datasets for the exact law.
    #[arg(long, default_value_t = 2000, value_parser = parse_count)]
    pub mc: u64,
    #[arg(long, default_value_t = 2000, value_parser = parse_count)]
    pub boot: u64,
    /// Population variance; data are drawn from N(0, sigma2 I).
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    pub sigma2: f64,
}

/// Global output settings shared by every command.
pub(crate) struct Output {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Output {
    /// Writes `text` to `--out` or stdout.
    pub fn emit(&self, text: &str) -> anyhow::Result<()> {
        match &self.out {
            Some(path) => io::write_bytes(path, text.as_bytes()).map_err(Into::into),
            None => {
                use std::io::Write;
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                stdout.flush()?;
                Ok(())
            }
        }
    }

    pub fn artifact<T: Artifact, C: Serialize>(&self, payload: T, config: &C) -> anyhow::Result<String> {
        Ok(RunArtifact::new(payload, Provenance::new(self.seed, config)?).to_json()?)
    }
}

pub fn run(cli: Cli) -> anyhow::Result<u8> {
    if let Some(t) = cli.threads {
        // a second call in the same process fails; the first pool is kept
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t as usize).build_global();
    }
    let out = Output { seed: cli.seed, out: cli.out, format: cli.format };
    match cli.command {
        Command::TwoSample(args) => two_sample(&args, &out),
        Command::OneSample(args) => one_sample(&args, &out),
        Command::Simulate(args) => grid::simulate(&args, &out),
        Command::Density(args) => density(&args, &out),
        Command::Verify(args) => verify::verify(&args, &out),
    }
}

fn load(path: &Path, center: bool) -> anyhow::Result<Dataset> {
    let x = io::read_dataset(path, DataFormat::from_path(path)).with_context(|| format!("reading {}", path.display()))?;
    Ok(if center { x.centered() } else { x })
}

fn bootstrap_config(seed: u64, boot: u64, alpha: f64, solver: Option<SolverChoice>, d: usize, s: usize) -> BootstrapConfig {
    BootstrapConfig {
        replicates: boot as usize,
        seed,
        solver: solver.unwrap_or_else(|| SolverChoice::auto(d, s)),
        alpha,
        ..Default::default()
    }
}

fn warn_sparsity(n: usize, m: usize, s: usize) {
    if let Some(w) = sparsity_warning(n, m, s) {
        eprintln!("warning: {w}");
    }
}

fn summarize(report: &TestReport) {
    let certified = report.statistic.inner.as_ref().is_none_or(|r| r.certified_exact);
    eprintln!("statistic  {}", report.statistic.value);
    eprintln!("q_alpha    {}", report.q_alpha);
    eprintln!("reject     {}", if report.reject { "yes" } else { "no" });
    eprintln!("p-value    {}", report.p_value_estimate);
    eprintln!("support    {}", report.support);
    eprintln!("certified  {}", if certified { "yes" } else { "no" });
}

fn emit_report<C: Serialize>(report: TestReport, config: &C, out: &Output) -> anyhow::Result<u8> {
    summarize(&report);
    let code = if report.reject { EXIT_REJECT } else { EXIT_ACCEPT };
    let text = match out.format {
        Format::Json => out.artifact(report, config)?,
        Format::Csv => io::distribution_to_csv(&report.distribution),
    };
    out.emit(&text)?;
    Ok(code)
}

#[derive(Serialize)]
struct Echo<'a, A> {
    command: &'static str,
    args: &'a A,
    bootstrap: &'a BootstrapConfig,
}

fn two_sample(args: &TwoSampleArgs, out: &Output) -> anyhow::Result<u8> {
    let x = load(&args.x, args.center)?;
    let y = load(&args.y, args.center)?;
    if x.d() != y.d() {
        bail!("dimension mismatch: --x has d = {} but --y has d = {}", x.d(), y.d());
    }
    let s = args.s as usize;
    warn_sparsity(x.n(), y.n(), s);
    let cfg = bootstrap_config(out.seed, args.boot, args.alpha, args.solver, x.d(), s);
    let report = two_sample_test(&x, &y, s, &cfg)?;
    emit_report(report, &Echo { command: "two-sample", args, bootstrap: &cfg }, out)
}

fn one_sample(args: &OneSampleArgs, out: &Output) -> anyhow::Result<u8> {
    let x = load(&args.x, args.center)?;
    if let Some(sigma2) = args.spherical {
        let cfg = bootstrap_config(out.seed, args.boot, args.alpha, args.solver, x.d(), 1);
        let report = spherical_intervals(&x, sigma2, &cfg)?;
        return emit_spherical(report, &Echo { command: "one-sample", args, bootstrap: &cfg }, out);
    }
    let path = args.sigma.as_ref().expect("clap requires --sigma or --spherical");
    let sigma = io::read_matrix(path, DataFormat::from_path(path)).with_context(|| format!("reading {}", path.display()))?;
    if sigma.dim() != x.d() {
        bail!("dimension mismatch: --x has d = {} but --sigma is {}x{}", x.d(), sigma.dim(), sigma.dim());
    }
    let s = args.s.expect("clap requires --s without --spherical") as usize;
    warn_sparsity(x.n(), x.n(), s);
    let cfg = bootstrap_config(out.seed, args.boot, args.alpha, args.solver, x.d(), s);
    let report = one_sample_test(&x, &sigma, s, &cfg, !args.plain)?;
    emit_report(report, &Echo { command: "one-sample", args, bootstrap: &cfg }, out)
}

fn emit_spherical<C: Serialize>(report: SphericalReport, config: &C, out: &Output) -> anyhow::Result<u8> {
    for (name, iv) in [("lambda_max", &report.lambda_max), ("lambda_min", &report.lambda_min)] {
        eprintln!(
            "{name}  observed {}  band [{}, {}]  sigma2 interval [{}, {}]",
            iv.observed, iv.band.0, iv.band.1, iv.sigma2_interval.0, iv.sigma2_interval.1
        );
    }
    let reject = !(report.lambda_max.contains_sigma2 && report.lambda_min.contains_sigma2);
    eprintln!("reject     {}", if reject { "yes" } else { "no" });
    let text = match out.format {
        Format::Json => out.artifact(report, config)?,
        Format::Csv => {
            let mut s = String::from("which,value\n");
            for (name, dist) in [("max", &report.max_distribution), ("min", &report.min_distribution)] {
                for v in dist.samples() {
                    s.push_str(&format!("{name},{v}\n"));
                }
            }
            s
        }
    };
    out.emit(&text)?;
    Ok(if reject { EXIT_REJECT } else { EXIT_ACCEPT })
}

fn density(args: &DensityArgs, out: &Output) -> anyhow::Result<u8> {
    if args.n.contains(&0) || args.d.contains(&0) {
        bail!("--n and --d entries must be at least 1");
    }
    let cfg = DensityConfig { sigma2: args.sigma2, boot_reps: args.boot as usize, seed: out.seed };
    let tables = density_study_spherical(&args.n, &args.d, args.mc as usize, &cfg)?;
    for t in &tables {
        eprintln!("n={:<5} d={:<4} KS(exact, m-boots)={:.4}  KS(exact, n-boots)={:.4}", t.n, t.d, t.ks_m_boots, t.ks_n_boots);
    }
    let echo = (("command", "density"), args);
    match &out.out {
        Some(dir) => {
            for t in &tables {
                write_density_csvs(dir, t)?;
            }
            let json = out.artifact(tables, &echo)?;
            io::write_bytes(&dir.join("density.json"), json.as_bytes())?;
        }
        None => {
            let text = match out.format {
                Format::Json => out.artifact(tables, &echo)?,
                Format::Csv => {
                    let mut s = String::new();
                    for t in &tables {
                        s.push_str(&format!("# n={} d={}\n", t.n, t.d));
                        s.push_str(&io::density_grid_to_csv(t)?);
                    }
                    s
                }
            };
            out.emit(&text)?;
        }
    }
    Ok(EXIT_ACCEPT)
}

fn write_density_csvs(dir: &Path, t: &DensityTable) -> anyhow::Result<()> {
    let tag = format!("n{}_d{}", t.n, t.d);
    io::write_bytes(&dir.join(format!("samples_{tag}.csv")), io::density_samples_to_csv(t)?.as_bytes())?;
    io::write_bytes(&dir.join(format!("kde_{tag}.csv")), io::density_grid_to_csv(t)?.as_bytes())?;
    Ok(())
}
