//! Command-line experiment harness.
//!
//! Exit codes: 0 success, 2 config error, 3 verification failure,
//! 4 numeric error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use oja_stream::config::{ExperimentConfig, Overrides};
use oja_stream::error::OjaError;
use oja_stream::runner;

#[derive(Parser)]
#[command(
    name = "oja-stream",
    about = "Streaming PCA experiment harness: run estimators, verify the analysis' inequalities, evaluate bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// Experiment config file (key = value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override: ambient dimension.
    #[arg(long)]
    d: Option<usize>,
    /// Override: basis-spike sigma parameter.
    #[arg(long)]
    sigma: Option<f64>,
    /// Override: replace n_grid with a single sample count.
    #[arg(long)]
    n: Option<u64>,
    /// Override: trials per grid point.
    #[arg(long)]
    trials: Option<usize>,
    /// Override: master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override: algorithm (oja | batch | block_power | boosted).
    #[arg(long)]
    algo: Option<String>,
    /// Override: decaying-schedule alpha.
    #[arg(long)]
    alpha: Option<f64>,
    /// Override: boosting copies.
    #[arg(long)]
    copies: Option<usize>,
    /// Override: block power block count.
    #[arg(long)]
    num_blocks: Option<u64>,
    /// Override: output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override: worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the configured estimator over n_grid x trials and emit CSV.
    Run(CommonArgs),
    /// Run the Monte Carlo verification suite and print a verdict table.
    Verify(CommonArgs),
    /// Evaluate the closed-form error bounds over n_grid.
    Bounds(CommonArgs),
    /// Check the stream's declared concentration parameters empirically.
    CheckModel(CommonArgs),
}

fn load_config(args: &CommonArgs) -> Result<ExperimentConfig, OjaError> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply_overrides(&Overrides {
        d: args.d,
        sigma: args.sigma,
        n: args.n,
        trials: args.trials,
        seed: args.seed,
        algo: args.algo.clone(),
        alpha: args.alpha,
        copies: args.copies,
        num_blocks: args.num_blocks,
        out: args.out.clone(),
        workers: args.workers,
    })?;
    Ok(cfg)
}

const EXIT_CONFIG: u8 = 2;
const EXIT_VERIFY: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

fn exit_for(err: &OjaError) -> u8 {
    match err {
        OjaError::Config { .. } | OjaError::InvalidParameter(_) | OjaError::Io(_) => EXIT_CONFIG,
        OjaError::Replay(_) => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, run): (&CommonArgs, fn(&ExperimentConfig) -> Result<u8, OjaError>) =
        match &cli.command {
            Command::Run(a) => (a, cmd_run),
            Command::Verify(a) => (a, cmd_verify),
            Command::Bounds(a) => (a, cmd_bounds),
            Command::CheckModel(a) => (a, cmd_check_model),
        };
    let cfg = match load_config(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run(&cfg) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}

fn cmd_run(cfg: &ExperimentConfig) -> Result<u8, OjaError> {
    let output = runner::run_and_write(cfg)?;
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    for s in &output.summary {
        eprintln!(
            "n = {:>8}: median sin^2 = {:.3e}  (p25 {:.3e}, p75 {:.3e}, trials {})",
            s.n, s.median_sin_sq, s.p25_sin_sq, s.p75_sin_sq, s.trials
        );
    }
    if let Some(out) = &cfg.out {
        eprintln!("wrote {}", out.display());
        eprintln!("wrote {}", runner::summary_path(out).display());
        if !output.checkpoints.is_empty() {
            eprintln!("wrote {}", runner::checkpoints_path(out).display());
        }
    }
    Ok(0)
}

fn cmd_verify(cfg: &ExperimentConfig) -> Result<u8, OjaError> {
    let rows = runner::run_verify(cfg)?;
    print!("{}", runner::format_verify_table(&rows));
    if rows.iter().all(|r| r.passed()) {
        Ok(0)
    } else {
        Ok(EXIT_VERIFY)
    }
}

fn cmd_bounds(cfg: &ExperimentConfig) -> Result<u8, OjaError> {
    let rows = runner::run_bounds(cfg)?;
    print!("{}", runner::format_bound_table(&rows));
    Ok(0)
}

fn cmd_check_model(cfg: &ExperimentConfig) -> Result<u8, OjaError> {
    let report = runner::run_check_model(cfg)?;
    print!("{}", runner::format_check_report(&report));
    if report.violated() {
        Ok(EXIT_VERIFY)
    } else {
        Ok(0)
    }
}
