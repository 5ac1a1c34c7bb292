//! `lnat`: run online L♮-convex minimization experiments.

mod config;
mod runner;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lnat_core::extension::{certify_lipschitz, measure_bound};
use lnat_core::oracles::{check_midpoint_convexity, check_midpoint_convexity_sampled};
use lnat_core::{Algorithm, CheckReport, FunctionSpec};
use rand_chacha::rand_core::SeedableRng;
use serde::Serialize;

use config::{Overrides, Plan, RawConfig, KEYS_HELP};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "lnat", version, about = "Online L♮-convex minimization experiments", after_long_help = KEYS_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run replicated experiments and write traces plus a summary.
    #[command(after_long_help = KEYS_HELP)]
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Check a function for discrete midpoint convexity on a domain.
    Check {
        domain: PathBuf,
        function: PathBuf,
        /// Random pairs to test when the domain is too large to scan.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Mean regret over a grid of horizons and its log-log slope.
    #[command(after_long_help = KEYS_HELP)]
    Sweep {
        config: PathBuf,
        /// Comma-separated horizons.
        #[arg(long = "T-grid", value_delimiter = ',', required = true)]
        t_grid: Vec<usize>,
        #[command(flatten)]
        flags: Flags,
    },
}

/// Flags that override the config file.
#[derive(Args, Clone, Default)]
struct Flags {
    #[arg(long)]
    algo: Option<Algorithm>,
    #[arg(long = "T")]
    horizon: Option<i64>,
    /// First seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of seeds.
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "proj-tol")]
    proj_tol: Option<f64>,
    #[arg(long = "proj-max-sweeps")]
    proj_max_sweeps: Option<usize>,
    #[arg(long = "regret-per-round")]
    regret_per_round: bool,
    /// Output directory.
    #[arg(long)]
    output: Option<String>,
    /// Worker threads (0: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
}

impl From<Flags> for Overrides {
    fn from(f: Flags) -> Self {
        Overrides {
            algo: f.algo,
            horizon: f.horizon,
            seed: f.seed,
            seeds: f.seeds,
            eta: f.eta,
            delta: f.delta,
            proj_tol: f.proj_tol,
            proj_max_sweeps: f.proj_max_sweeps,
            regret_per_round: f.regret_per_round,
            output: f.output,
            workers: f.workers,
        }
    }
}

fn plan(path: &Path, flags: Flags) -> Result<Plan, CliError> {
    let mut raw = RawConfig::load(path)?;
    raw.apply(&flags.into());
    let base = path.parent().unwrap_or(Path::new("."));
    Plan::from_raw(raw, base)
}

#[derive(Serialize)]
struct CheckOutput {
    dim: usize,
    points: Option<usize>,
    exhaustive: bool,
    bound: Option<f64>,
    lipschitz: Option<f64>,
    midpoint_convexity: CheckReport,
}

fn check(domain: &Path, function: &Path, samples: usize, seed: u64) -> Result<bool, CliError> {
    let text = |p: &Path| {
        std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))
    };
    let k = lnat_core::io::parse_domain(&text(domain)?).map_err(|e| CliError::Config(e.to_string()))?;
    let f = FunctionSpec::from_toml_str(&text(function)?).map_err(|e| CliError::Config(e.to_string()))?;
    f.validate(k.dim()).map_err(|e| CliError::Config(e.to_string()))?;
    let runtime = |e: lnat_core::Error| CliError::Runtime(e.to_string());
    let out = match k.enumerate() {
        Ok(points) => CheckOutput {
            dim: k.dim(),
            points: Some(points.len()),
            exhaustive: true,
            bound: Some(measure_bound(&f, &k).map_err(runtime)?),
            lipschitz: Some(certify_lipschitz(&f, &k).map_err(runtime)?),
            midpoint_convexity: check_midpoint_convexity(&f, &k).map_err(runtime)?,
        },
        Err(lnat_core::Error::TooLarge { .. }) => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            CheckOutput {
                dim: k.dim(),
                points: None,
                exhaustive: false,
                bound: None,
                lipschitz: None,
                midpoint_convexity: check_midpoint_convexity_sampled(&f, &k, samples, &mut rng).map_err(runtime)?,
            }
        }
        Err(e) => return Err(runtime(e)),
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("reports serialize"));
    Ok(out.midpoint_convexity.passed)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |x| format!("{x:.6}"))
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Run { config, flags } => {
            let plan = plan(&config, flags)?;
            let s = runner::run(&plan)?;
            println!(
                "{} seeds, T = {}: mean R_T = {}, stddev = {}, bound = {:.6}, ratio = {}",
                s.seeds,
                s.horizon,
                fmt_opt(s.mean_regret),
                fmt_opt(s.stddev_regret),
                s.theoretical_bound,
                fmt_opt(s.ratio)
            );
            println!("wrote {}", plan.output.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { domain, function, samples, seed } => {
            Ok(if check(&domain, &function, samples, seed)? { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Sweep { config, t_grid, flags } => {
            if t_grid.contains(&0) {
                return Err(CliError::Config("T must be ≥ 1".into()));
            }
            let mut flags = flags;
            flags.horizon = Some(t_grid[0] as i64);
            let plan = plan(&config, flags)?;
            let r = runner::sweep(&plan, &t_grid)?;
            for p in &r.points {
                println!(
                    "T = {:>8}: mean R_T = {}, bound = {:.6}",
                    p.horizon,
                    fmt_opt(p.mean_regret),
                    p.theoretical_bound
                );
            }
            println!("slope = {}", fmt_opt(r.slope));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("lnat: {e}");
            ExitCode::from(e.code())
        }
    }
}
