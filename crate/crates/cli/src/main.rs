//! `measurekit`: run experiment configs, validate them, or emit the
//! built-in demos.
//!
//! Exit codes: 0 success, 1 failed check or sampling comparison, 2 config
//! parse error, 3 validation error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use measurekit_core::harness::{
    demo_config, run_config, validate_config, Report, RunOptions, DEMO_NAMES,
};
use measurekit_core::Error;

#[derive(Parser)]
#[command(
    name = "measurekit",
    version,
    about = "Probabilistic experiment pipelines on finite information spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a config: pipeline, queries, checks, report
    Run {
        config: PathBuf,
        /// Override the config seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the default trial count of sampling steps
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for sampling steps (does not affect results)
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Parse a config and validate every declaration
    Validate { config: PathBuf },
    /// Print a built-in example config
    Demo {
        /// One of: classical-2x2, lueders-qubit, consecutive
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

const EXIT_CHECK_FAILURE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

fn main() -> ExitCode {
    if let Ok(text) = std::env::var("MEASUREKIT_TOLERANCE") {
        match text.parse::<f64>() {
            Ok(tol) if tol.is_finite() && tol > 0.0 => measurekit_core::set_tolerance(tol),
            _ => {
                eprintln!(
                    "measurekit: MEASUREKIT_TOLERANCE must be a positive number, got `{text}`"
                );
                return ExitCode::from(EXIT_PARSE);
            }
        }
    }

    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            trials,
            format,
            out,
            workers,
        } => {
            let options = RunOptions {
                seed,
                trials,
                workers,
            };
            match run_config(&config, &options) {
                Ok(report) => {
                    let text = match format {
                        Format::Json => report.to_json_string(),
                        Format::Table => report.to_table_string(),
                    };
                    if let Err(code) = emit(&text, out.as_deref()) {
                        return code;
                    }
                    if report.passed {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(EXIT_CHECK_FAILURE)
                    }
                }
                Err(e) => failure(e),
            }
        }
        Command::Validate { config } => match validate_config(&config) {
            Ok(report) => {
                print!("{}", validation_summary(&report));
                ExitCode::SUCCESS
            }
            Err(e) => failure(e),
        },
        Command::Demo { name, out } => match demo_config(&name) {
            Some(text) => {
                if let Err(code) = emit(text, out.as_deref()) {
                    return code;
                }
                ExitCode::SUCCESS
            }
            None => {
                eprintln!(
                    "measurekit: unknown demo `{name}`; available: {}",
                    DEMO_NAMES.join(", ")
                );
                ExitCode::from(EXIT_PARSE)
            }
        },
    }
}

fn emit(text: &str, out: Option<&std::path::Path>) -> Result<(), ExitCode> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| {
            eprintln!("measurekit: cannot write {}: {e}", path.display());
            ExitCode::from(EXIT_PARSE)
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn validation_summary(report: &Report) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{} declarations validated\n",
        report.declarations.len()
    ));
    for d in &report.declarations {
        out.push_str(&format!("  {} {} ({})\n", d.kind, d.name, d.summary));
    }
    out
}

fn failure(error: Error) -> ExitCode {
    eprintln!("measurekit: {error}");
    match error {
        Error::ConfigParse(_) => ExitCode::from(EXIT_PARSE),
        _ => ExitCode::from(EXIT_VALIDATION),
    }
}
