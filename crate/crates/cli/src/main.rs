use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nonlocal_spectra::{apply_seed_override, echo, parse_config, run_all, write_artifacts};

#[derive(Parser)]
#[command(
    name = "nonlocal-spectra",
    version,
    about = "Principal spectra of nonlocal dispersal operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario in a config file.
    Run {
        config: PathBuf,
        /// Exit nonzero when any verdict fails.
        #[arg(long)]
        strict: bool,
        /// Output directory (overrides `[output] dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of scenarios run concurrently.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Parse a config and print it with defaults resolved.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Validate { config } => match parse_config(&config).and_then(|s| echo(&s)) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::Run {
            config,
            strict,
            out,
            workers,
        } => {
            let mut scenarios = match parse_config(&config) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if let Err(e) = apply_seed_override(&mut scenarios) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            let results = match run_all(&scenarios, workers) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let mut errored = false;
            let mut failed = false;
            for (scenario, result) in scenarios.iter().zip(results) {
                let dir = out
                    .clone()
                    .or_else(|| scenario.output.dir.as_ref().map(PathBuf::from))
                    .unwrap_or_else(|| PathBuf::from("out"));
                match result.and_then(|r| write_artifacts(&r, &dir).map(|a| (r, a))) {
                    Ok((report, art)) => {
                        print!("{}", report.text());
                        println!("wrote {}\n", art.csv.display());
                        failed |= !report.passed();
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        errored = true;
                    }
                }
            }
            if errored {
                ExitCode::from(2)
            } else if strict && failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}
