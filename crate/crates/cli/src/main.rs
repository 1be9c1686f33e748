use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use komparo_cli::{oracle_suite, run_file, write_preset, CliError};

#[derive(Parser)]
#[command(
    name = "komparo",
    version,
    about = "Envelope tables and certification reports for f over level sets of g"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a JSON config: write envelope CSVs and report.json.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write a canned config.
    Preset {
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare envelopes against brute force on random instances.
    OracleSuite {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config } => {
            let outcome = run_file(&config)?;
            for line in outcome.summary_lines() {
                println!("{line}");
            }
            match outcome.failures() {
                0 => Ok(()),
                n => Err(CliError::ChecksFailed(n)),
            }
        }
        Command::Preset { name, out } => write_preset(&name, &out),
        Command::OracleSuite { seed, trials } => {
            let summary = oracle_suite(seed, trials)?;
            println!("{}", summary.to_json());
            match summary.trials - summary.passes {
                0 => Ok(()),
                n => Err(CliError::ChecksFailed(n)),
            }
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("komparo: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
