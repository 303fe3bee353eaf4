use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sarsec::cli;

/// Simulator and learning harness for time-shared radar sensing and secure
/// downlink scheduling from an orbiting aerial base station.
#[derive(Parser)]
#[command(name = "sarsec", version, about)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a scheduling policy on randomly generated adversary tracks.
    Train {
        /// Configuration file (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Output directory for checkpoint, curve, and config snapshot.
        #[arg(long)]
        out: PathBuf,
        /// Master seed; all randomness derives from it.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate a checkpoint on a scenario file; writes trace and summary.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Scenario file naming a track generator and its parameters.
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the policy against both benchmarks over adversary speeds.
    Sweep {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Comma-separated speeds in m/s.
        #[arg(long, value_delimiter = ',', required = true)]
        speeds: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the non-learning benchmarks on a scenario.
    Baseline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = match args.command {
        Command::Train { config, out, seed } => cli::cmd_train(&config, &out, seed).map(|a| {
            println!(
                "checkpoint: {} (best eval reward {:.4})",
                a.checkpoint.display(),
                a.best_eval_reward
            );
        }),
        Command::Eval {
            checkpoint,
            scenario,
            out,
        } => cli::cmd_eval(&checkpoint, &scenario, &out).map(|s| {
            println!(
                "mean secrecy {:.4} bits/s/Hz over {} frames (user rate {:.4}, scr violations {})",
                s.mean_secrecy, s.frames, s.mean_user_rate, s.scr_violations
            );
        }),
        Command::Sweep {
            checkpoint,
            speeds,
            out,
            seed,
        } => cli::cmd_sweep(&checkpoint, &speeds, &out, seed).map(|p| {
            println!("sweep written to {}", p.display());
        }),
        Command::Baseline {
            config,
            scenario,
            out,
            seed,
        } => cli::cmd_baseline(&config, &scenario, &out, seed).map(|p| {
            println!("metrics written to {}", p.display());
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(cli::exit_code(&err) as u8)
        }
    }
}
