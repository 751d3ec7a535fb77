//! Command-line front end. Scenario values arrive in dB and are converted to
//! linear once, at the boundary.

mod commands;
mod scenario;
mod selfcheck;
mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{analyze, figure, simulate, tradeoff};
pub use scenario::{PathArg, ScenarioArgs, ScenarioPoint, SimArgs, Threshold, db_to_linear, linear_to_db};
pub use selfcheck::selfcheck;
pub use table::{Cell, Table, format_float};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_CHECK: i32 = 4;

/// Caps Monte Carlo worker threads; never changes results.
pub const THREADS_ENV: &str = "NOMA_SIM_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_numeric() { EXIT_NUMERIC } else { EXIT_USAGE };
        let message = match e {
            Error::Domain(m) | Error::InvalidParams(m) => m,
            other => other.to_string(),
        };
        CliError { code, message }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Parser, Debug)]
#[command(name = "cbnoma", version, about = "Correlation-based NOMA power and outage toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Closed-form bounds, asymptotics and outage per scenario point
    Analyze {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo estimate of the average minimal power
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Regenerate a figure dataset (1: threshold sweep, 2: antenna sweep,
    /// 3: threshold schedules)
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        id: u8,
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Power-outage frontier of the tau = 1 schedule over --lambda
    Tradeoff {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the invariant suite
    Selfcheck {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to FILE instead of stdout
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

/// Result of a command: the dataset plus diagnostics for stderr.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub notes: Vec<String>,
    /// Failed self-consistency checks; non-zero maps to [`EXIT_CHECK`].
    pub violations: usize,
}

impl Outcome {
    pub fn clean(table: Table) -> Self {
        Outcome {
            table,
            notes: Vec::new(),
            violations: 0,
        }
    }
}

pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) if s.trim().is_empty() => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::usage(format!("{THREADS_ENV} must be a positive integer, got {s:?}"))),
        },
    }
}

pub fn execute(command: &Command, threads: Option<usize>) -> Result<Outcome, CliError> {
    match command {
        Command::Analyze { scenario, .. } => analyze(scenario).map(Outcome::clean),
        Command::Simulate { scenario, sim, .. } => simulate(scenario, sim, threads),
        Command::Figure { id, scenario, sim, .. } => figure(*id, scenario, sim, threads),
        Command::Tradeoff { scenario, .. } => tradeoff(scenario).map(Outcome::clean),
        Command::Selfcheck { scenario, sim, .. } => selfcheck(scenario, sim, threads),
    }
}

fn output_args(command: &Command) -> &OutputArgs {
    match command {
        Command::Analyze { output, .. }
        | Command::Simulate { output, .. }
        | Command::Figure { output, .. }
        | Command::Tradeoff { output, .. }
        | Command::Selfcheck { output, .. } => output,
    }
}

fn emit(outcome: &Outcome, output: &OutputArgs) -> Result<(), CliError> {
    let text = match output.format {
        Format::Csv => outcome.table.to_csv(),
        Format::Json => outcome.table.to_json(),
    };
    let io_err = |e: std::io::Error| CliError::usage(format!("cannot write output: {e}"));
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(io_err),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(io_err),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = threads_from_env().and_then(|threads| {
        let outcome = execute(&cli.command, threads)?;
        emit(&outcome, output_args(&cli.command))?;
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            for note in &outcome.notes {
                eprintln!("{note}");
            }
            if outcome.violations > 0 {
                eprintln!("error: {} self-check violation(s)", outcome.violations);
                EXIT_CHECK
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

pub fn main() -> i32 {
    run_from(std::env::args_os())
}
