//! `anyonqism`: verification suites, spectra, Bethe roots and statistics
//! sweeps for the graded XXX and t–J chains.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;

use clap::{Parser, Subcommand};

pub use config::{ConfigArgs, Format, RunConfig, StrategyArg};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] anyon_qism::error::Error),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use anyon_qism::error::Error;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(Error::ResourceLimit { .. }) => 3,
            CliError::Core(Error::InvalidConfig(_) | Error::ZeroEta | Error::NonUnimodularQ { .. }) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "anyonqism", version, about = "Graded QISM toolkit for hard-core anyon chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Yang–Baxter, RLL, commutation, transfer and Hamiltonian checks
    Verify(ConfigArgs),
    /// Sector-resolved eigenvalues of the Hamiltonian
    Spectrum(ConfigArgs),
    /// Solve the Bethe equations and match roots against the spectrum
    Bethe(ConfigArgs),
    /// Level flow of the spectrum over a grid of statistics angles
    Sweep(ConfigArgs),
}

/// Outcome of a command: the rendered record and whether every check passed.
pub struct Outcome {
    pub body: Vec<u8>,
    pub ok: bool,
}

type Runner = fn(&RunConfig) -> Result<Outcome, CliError>;

pub fn execute(command: Command) -> Result<Outcome, CliError> {
    let (args, f): (ConfigArgs, Runner) = match command {
        Command::Verify(a) => (a, commands::verify),
        Command::Spectrum(a) => (a, commands::spectrum),
        Command::Bethe(a) => (a, commands::bethe),
        Command::Sweep(a) => (a, commands::sweep),
    };
    let cfg = RunConfig::resolve(args)?;
    let outcome = f(&cfg)?;
    output::emit(cfg.out.as_deref(), &outcome.body)?;
    Ok(outcome)
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(o) if o.ok => 0,
        Ok(_) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
