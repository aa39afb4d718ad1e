//! `gmix`: fit Gaussian mixtures to weighted 1-D data, benchmark
//! initialization methods, scan component counts, and generate
//! synthetic datasets.
//!
//! Exit codes: 0 success; 2 input or format error; 3 infeasible
//! configuration; 4 diverged fit.

use clap::{Args, Parser, Subcommand, ValueEnum};
use gmix_cli::commands::{cmd_fit, cmd_scan_k, cmd_simulate, FitArgs, ScanArgs, SimulateArgs};
use gmix_cli::error::{io_error, AppError, AppResult};
use gmix_cli::io::{parse_k_range, parse_x_range, InputFormat};
use gmix_cli::method::Method;
use gmix_core::EmConfig;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "gmix",
    version,
    about = "Gaussian mixture fitting for 1-D weighted data, with optimal-partition initialization"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit a mixture to an input file and write a model file per sample.
    Fit(FitCmd),
    /// Run a benchmark matrix from a TOML config and write CSV tables.
    Benchmark(BenchmarkCmd),
    /// Fit a range of component counts and pick the best by BIC.
    ScanK(ScanKCmd),
    /// Generate a synthetic dataset and write it as a points CSV.
    Simulate(SimulateCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    /// CSV rows `x[,y]`, weight defaulting to 1.
    PointsCsv,
    /// TSV with a header: positions plus one intensity column per sample.
    SpectraTsv,
}

impl From<FormatArg> for InputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::PointsCsv => InputFormat::PointsCsv,
            FormatArg::SpectraTsv => InputFormat::SpectraTsv,
        }
    }
}

#[derive(Args)]
struct EmFlags {
    /// Lower bound on component standard deviations [default: 0.01]
    #[arg(long)]
    sigma_min: Option<f64>,
    /// Lower bound on mixing weights [default: 0.0001]
    #[arg(long)]
    alpha_min: Option<f64>,
    /// Iteration cap [default: 5000]
    #[arg(long)]
    max_iters: Option<usize>,
    /// Relative log-likelihood change that stops iterating [default: 1e-8]
    #[arg(long)]
    rel_tol: Option<f64>,
}

impl EmFlags {
    fn to_config(&self) -> AppResult<EmConfig> {
        let base = EmConfig::simulation();
        EmConfig::new(
            self.sigma_min.unwrap_or(base.sigma_min),
            self.alpha_min.unwrap_or(base.alpha_min),
            self.max_iters.unwrap_or(base.max_iters),
            self.rel_tol.unwrap_or(base.rel_tol),
        )
        .map_err(|e| AppError::Input(e.to_string()))
    }
}

#[derive(Args)]
struct FitCmd {
    /// Input data file
    input: PathBuf,
    #[arg(long, value_enum, default_value = "points-csv")]
    format: FormatArg,
    /// Initialization method: eq, hclu-c, hclu-a, dp-q1, dp-q2, dp-q3, dp-q4
    #[arg(long)]
    method: String,
    /// Width penalty for dp-q4
    #[arg(long)]
    delta: Option<f64>,
    /// Number of components
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    em: EmFlags,
    /// Keep only spectra rows with positions inside lo..hi (inclusive)
    #[arg(long)]
    range: Option<String>,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchmarkCmd {
    /// Benchmark configuration (TOML)
    config: PathBuf,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct ScanKCmd {
    /// Input data file (single sample)
    input: PathBuf,
    #[arg(long, value_enum, default_value = "points-csv")]
    format: FormatArg,
    /// Initialization method: eq, hclu-c, hclu-a, dp-q1, dp-q2, dp-q3, dp-q4
    #[arg(long)]
    method: String,
    /// Width penalty for dp-q4
    #[arg(long)]
    delta: Option<f64>,
    /// Component counts to scan, inclusive (e.g. 1..6)
    #[arg(long)]
    k_range: String,
    #[command(flatten)]
    em: EmFlags,
    /// Keep only spectra rows with positions inside lo..hi (inclusive)
    #[arg(long)]
    range: Option<String>,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateCmd {
    /// Scenario: 1 = equal weights σ∈(0.5,1); 2 = equal, σ∈(0.05,1);
    /// 3 = linear weights, σ∈(0.5,1); 4 = linear, σ∈(0.05,1)
    #[arg(long)]
    group: u8,
    /// Number of components
    #[arg(long)]
    k: usize,
    /// Overlap between adjacent components, in (0,1)
    #[arg(long)]
    ov: f64,
    /// Number of observations
    #[arg(long)]
    n: usize,
    /// Random seed
    #[arg(long)]
    seed: u64,
    /// Output file stem [default: sim-g<group>-k<k>-ov<ov>-n<n>-seed<seed>]
    #[arg(long)]
    name: Option<String>,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn ensure_out_dir(dir: &PathBuf) -> AppResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

fn run(cli: Cli) -> AppResult<()> {
    match cli.cmd {
        Cmd::Fit(c) => {
            ensure_out_dir(&c.out)?;
            let outcome = cmd_fit(&FitArgs {
                input: c.input,
                format: c.format.into(),
                method: Method::from_flags(&c.method, c.delta)?,
                k: c.k,
                em: c.em.to_config()?,
                range: c.range.as_deref().map(parse_x_range).transpose()?,
                out_dir: c.out,
            })?;
            print!("{}", outcome.summary);
        }
        Cmd::Benchmark(c) => {
            ensure_out_dir(&c.out)?;
            let outcome = gmix_cli::benchmark::cmd_benchmark(&c.config, &c.out)?;
            print!("{}", outcome.summary_text);
        }
        Cmd::ScanK(c) => {
            ensure_out_dir(&c.out)?;
            let outcome = cmd_scan_k(&ScanArgs {
                input: c.input,
                format: c.format.into(),
                method: Method::from_flags(&c.method, c.delta)?,
                k_range: parse_k_range(&c.k_range)?,
                em: c.em.to_config()?,
                range: c.range.as_deref().map(parse_x_range).transpose()?,
                out_dir: c.out,
            })?;
            print!("{}", outcome.summary);
        }
        Cmd::Simulate(c) => {
            ensure_out_dir(&c.out)?;
            let outcome = cmd_simulate(&SimulateArgs {
                group: c.group,
                k: c.k,
                ov: c.ov,
                n: c.n,
                seed: c.seed,
                out_dir: c.out,
                name: c.name,
            })?;
            print!("{}", outcome.summary);
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
