use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cvf_cli::experiments;
use cvf_cli::{CliError, CliResult, ExperimentConfig};

#[derive(Debug, Parser)]
#[command(name = "cvf", version, about = "Size, power and limit studies for critical value function tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Comma-separated list of correlations.
    #[arg(long, global = true, allow_hyphen_values = true)]
    rho: Option<String>,
    #[arg(long = "T", global = true)]
    t: Option<usize>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long = "J", global = true)]
    j: Option<usize>,
    /// Include a linear trend in the deterministic part.
    #[arg(long, global = true)]
    trend: bool,
    /// `known` or `estimated`.
    #[arg(long, global = true)]
    cov_mode: Option<String>,
    /// Override any configuration key, e.g. `--set calib_draws=50000`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Refine and store a CVF per correlation.
    Calibrate,
    /// Null rejection of the CVF test and baselines over a sweep of c.
    Size,
    /// Power against local alternatives.
    Power,
    /// CVF values on simulated samples.
    CvfSurface,
    /// Endpoint-only, refined and flattened CVFs side by side.
    Compare,
    /// Convergence of local statistics to their limit laws.
    Limits,
}

fn build_config(cli: &Cli) -> CliResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        cfg.apply_text(&text)?;
    }
    let mut pairs: Vec<(&str, String)> = Vec::new();
    if let Some(v) = cli.seed {
        pairs.push(("seed", v.to_string()));
    }
    if let Some(v) = &cli.out {
        pairs.push(("out", v.display().to_string()));
    }
    if let Some(v) = cli.threads {
        pairs.push(("threads", v.to_string()));
    }
    if let Some(v) = &cli.rho {
        pairs.push(("rho", v.clone()));
    }
    if let Some(v) = cli.t {
        pairs.push(("T", v.to_string()));
    }
    if let Some(v) = cli.alpha {
        pairs.push(("alpha", format!("{v:?}")));
    }
    if let Some(v) = cli.epsilon {
        pairs.push(("epsilon", format!("{v:?}")));
    }
    if let Some(v) = cli.j {
        pairs.push(("J", v.to_string()));
    }
    if cli.trend {
        pairs.push(("trend", "true".into()));
    }
    if let Some(v) = &cli.cov_mode {
        pairs.push(("cov_mode", v.clone()));
    }
    for (k, v) in pairs {
        cfg.set(k, &v)?;
    }
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    let cfg = build_config(cli)?;
    if let Some(n) = cfg.threads {
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Calibrate => experiments::run_calibrate(&cfg),
        Command::Size => experiments::run_size_study(&cfg),
        Command::Power => experiments::run_power_study(&cfg),
        Command::CvfSurface => experiments::run_cvf_surface(&cfg),
        Command::Compare => experiments::run_compare(&cfg),
        Command::Limits => experiments::run_limits(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
