use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use regimevol_cli::oracle::{run_oracles, OracleOptions};
use regimevol_cli::pipeline::{run, RunOptions};
use regimevol_cli::simulate::{scenario_list, simulate};
use regimevol_cli::stages::stages;
use regimevol_cli::CliError;

#[derive(Parser)]
#[command(name = "regimevol", version, about = "Regime-aware volatility analysis pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Run only this stage (garch-midas, diagnostics, msr, qr).
        #[arg(long)]
        stage: Option<String>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a simulated scenario to CSV files.
    Simulate {
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// List the available scenarios and stages.
        #[arg(long)]
        list: bool,
    },
    /// Check the estimators against their reference implementations.
    TestOracle {
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run { config, stage, seed, out } => match run(&config, &RunOptions { stage, seed, out }) {
            Ok(summary) => {
                println!("stages: {}", summary.stages.join(", "));
                println!("wrote {} artifacts to {}", summary.artifacts.len(), summary.out_dir.display());
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::Simulate { list: true, .. } => {
            println!("scenarios:");
            for (name, description) in scenario_list() {
                println!("  {name:<18} {description}");
            }
            println!("stages:");
            for s in stages() {
                println!("  {:<18} {}", s.name(), s.description());
            }
            ExitCode::SUCCESS
        }
        Command::Simulate { scenario: None, .. } => {
            eprintln!("error: --scenario is required (see --list)");
            ExitCode::from(1)
        }
        Command::Simulate { scenario: Some(name), seed, out, .. } => match simulate(&name, seed, &out) {
            Ok(files) => {
                for f in files {
                    println!("{}", f.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::TestOracle { instances, reps, seed } => {
            let checks = run_oracles(&OracleOptions { instances, reps, seed });
            for c in &checks {
                println!("{c}");
            }
            if checks.iter().all(|c| c.passed) { ExitCode::SUCCESS } else { ExitCode::from(2) }
        }
    }
}
