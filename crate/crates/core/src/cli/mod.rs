//! Command-line front end: `riccati solve|classify|verify PROBLEM.json`.
//!
//! Every command prints its JSON document to stdout and writes it, together
//! with any trajectory CSVs, into the output directory. Exit status is 0 on
//! success, 1 when `verify` finds a deviation above tolerance and 2 for
//! input errors.

mod commands;
mod json;
mod problem;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::criteria::CriterionName;
use crate::expr::ParseError;

pub use commands::{cmd_classify, cmd_solve, cmd_verify, Output};
pub use json::{Num, Point};
pub use problem::{Options, Problem, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;

/// Environment variable holding the log filter (`RICCATI_LOG=info`).
pub const LOG_ENV: &str = "RICCATI_LOG";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("invalid problem file: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("{field}: {source}")]
    Expression { field: String, source: ParseError },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Parser)]
#[command(name = "riccati", version, about = "Classify, solve and cross-check Riccati equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve through the first satisfied reduction and write trajectories.
    Solve(RunArgs),
    /// Run every integrability detector and report the results.
    Classify(RunArgs),
    /// Cross-check the reductions against direct integration.
    Verify(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Problem file (JSON).
    pub problem: PathBuf,
    /// Integration step.
    #[arg(long)]
    pub step: Option<f64>,
    /// Number of detection grid points.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Relative tolerance of the detectors.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Restrict to one criterion (e.g. RDM05, RaoK, Zh99Table3).
    #[arg(long)]
    pub criterion: Option<CriterionName>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub output: PathBuf,
}

impl RunArgs {
    fn options(&self, problem: &Problem) -> Result<Options, CliError> {
        let o = Options {
            step: self.step.unwrap_or(problem.options.step),
            grid: self.grid.unwrap_or(problem.options.grid),
            tol: self.tol.unwrap_or(problem.options.tol),
        };
        o.validate()?;
        Ok(o)
    }
}

/// Runs a parsed command line; returns the document and the exit status.
pub fn run(cli: &Cli) -> Result<(Output, i32), CliError> {
    let (Command::Solve(args) | Command::Classify(args) | Command::Verify(args)) = &cli.command;
    let problem = Problem::from_path(&args.problem)?;
    let options = args.options(&problem)?;
    let output = match &cli.command {
        Command::Solve(_) => cmd_solve(&problem, &options, args.criterion)?,
        Command::Classify(_) => cmd_classify(&problem, &options, args.criterion),
        Command::Verify(_) => cmd_verify(&problem, &options, args.criterion),
    };
    output.write(&args.output)?;
    let status = if output.passed { EXIT_OK } else { EXIT_VERIFY_FAILED };
    Ok((output, status))
}

/// Entry point of the `riccati` binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter(LOG_ENV)).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT_ERROR } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok((output, status)) => {
            print!("{}", output.json);
            status
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT_ERROR
        }
    }
}
