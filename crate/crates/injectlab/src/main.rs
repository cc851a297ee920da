//! Command-line front end: single episodes, full sweeps, the verification
//! suite, the hard-tree lower bound, and the acceptance battery.
//!
//! Exit codes: 0 on success, 1 when a property or bound is violated, 2 for
//! configuration or I/O problems.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use injectlab::harness::{self, accept, AlphaConfig, ExperimentConfig};
use injectlab::rational::{parse_q, Rat};
use injectlab::{Error, Result};

#[derive(Parser)]
#[command(
    name = "injectlab",
    version,
    about = "Sequential prediction with abstention under clean-label injection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode of a config and print its transcript.
    Run {
        /// Experiment config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Episode seed; defaults to the config's trial-0 seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Horizon; defaults to the config's first.
        #[arg(long)]
        horizon: Option<usize>,
        /// Allow the transcript-counting score (slow; horizons capped).
        #[arg(long)]
        expensive: bool,
    },
    /// Run every (horizon, trial) episode of a config and emit CSV.
    Sweep {
        /// Experiment config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// CSV destination; overrides the config's `out`. Stdout if neither.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's trial count.
        #[arg(long)]
        trials: Option<usize>,
        /// Override the threshold with a fixed rational like 7/2.
        #[arg(long)]
        alpha: Option<String>,
        /// Allow the transcript-counting score (slow; horizons capped).
        #[arg(long)]
        expensive: bool,
    },
    /// Re-run the verification suite: goodness, certificates, engine
    /// agreement, attackability.
    Verify {
        /// Suite file (JSON); defaults to the bundled one.
        #[arg(long)]
        suite: Option<PathBuf>,
    },
    /// The hard-tree lower bound: every learner pays Omega(sqrt(T)).
    Lowerbound {
        #[arg(long, default_value_t = 400)]
        horizon: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0xC6)]
        seed: u64,
    },
    /// The full ten-criterion acceptance battery.
    Accept,
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    ExperimentConfig::from_json(&text)
}

/// Ok(true) on a clean pass, Ok(false) when some property failed.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config, seed, horizon, expensive } => {
            let config = load_config(&config)?;
            let (lines, tally, alpha) = harness::run_single(&config, horizon, seed, expensive)?;
            println!("{} alpha={alpha}", config.name);
            for line in lines {
                println!("{line}");
            }
            println!(
                "err_mis={} err_abs={} combined={}",
                tally.err_mis,
                tally.err_abs,
                tally.combined()
            );
            Ok(true)
        }
        Command::Sweep { config, out, seed, trials, alpha, expensive } => {
            let mut config = load_config(&config)?;
            if let Some(s) = seed {
                config.seed = s;
            }
            if let Some(t) = trials {
                config.trials = t;
            }
            if let Some(a) = alpha {
                let value =
                    parse_q(&a).map_err(|e| Error::Config(format!("bad --alpha: {e}")))?;
                config.set_alpha(AlphaConfig::Fixed { value: Rat::from(value) });
            }
            let rows = harness::run_sweep(&config, expensive)?;
            let report = harness::emit_report(&rows, config.score_spec())?;
            match out.or_else(|| config.out.clone().map(PathBuf::from)) {
                Some(path) => {
                    harness::write_csv(&rows, &path)?;
                    println!("wrote {} rows to {}", rows.len(), path.display());
                }
                None => print!("{}", harness::csv_string(&rows)),
            }
            println!("{report}");
            Ok(!report.contains("verdict: FAIL"))
        }
        Command::Verify { suite } => {
            let path = suite.unwrap_or_else(accept::bundled_suite_path);
            let suite = accept::load_suite(&path)?;
            let mut all = true;
            for check in &suite.checks {
                let outcome = accept::run_check(check)?;
                println!("{}", outcome.line());
                all &= outcome.passed;
            }
            Ok(all)
        }
        Command::Lowerbound { horizon, trials, seed } => {
            let outcomes = harness::hard_tree_lower_bound(horizon, trials, seed)?;
            let mut all = true;
            for o in &outcomes {
                println!(
                    "{}: mean combined {:.2}, ci95 [{:.2}, {:.2}], threshold {:.2}: {}",
                    o.learner,
                    o.mean_combined,
                    o.ci95.0,
                    o.ci95.1,
                    o.threshold,
                    if o.forced { "FORCED" } else { "UNDER" }
                );
                all &= o.forced;
            }
            Ok(all)
        }
        Command::Accept => {
            let outcomes = accept::run_all()?;
            Ok(outcomes.iter().all(|o| o.passed))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Io(_) | Error::Json(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
