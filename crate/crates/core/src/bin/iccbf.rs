use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use learned_iccbf::cli;
use learned_iccbf::config::RunConfig;

#[derive(Parser)]
#[command(name = "iccbf", version, about = "Learned distance-field safety filter pipeline")]
struct Args {
    /// INI run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration value, `section.key=value` (repeatable).
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Print the effective configuration before running.
    #[arg(long, global = true)]
    show_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distance transform of the map and training-set sampling.
    Edf,
    /// Fit the distance regressor (explicit hyperparameters or grid search).
    Train,
    /// Check the barrier condition over a grid of states.
    Verify,
    /// Closed-loop rollout with the safety filter.
    Sim,
    /// Time the batched filter against the per-entry reference.
    Bench,
}

fn run(args: &Args) -> learned_iccbf::Result<cli::Outcome> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for o in &args.overrides {
        cfg.apply_override(o)?;
    }
    if args.show_config {
        print!("{}", cfg.to_ini_string());
    }
    match args.command {
        Command::Edf => cli::cmd_edf(&cfg, &args.out),
        Command::Train => cli::cmd_train(&cfg, &args.out),
        Command::Verify => cli::cmd_verify(&cfg, &args.out),
        Command::Sim => cli::cmd_sim(&cfg, &args.out),
        Command::Bench => cli::cmd_bench(&cfg, &args.out),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            if !outcome.summary.ends_with('\n') {
                println!();
            }
            if outcome.success {
                ExitCode::SUCCESS
            } else {
                eprintln!("safety check failed");
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
