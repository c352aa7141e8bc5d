use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crbopt::baseline::pgd_solve;
use crbopt::harness::config::SolverKind;
use crbopt::harness::{run_checks, run_sweep, write_records, ConfigLayer, ExperimentConfig};
use crbopt::lpm::{initialize, solve};
use crbopt::trace::SolveStatus;
use crbopt::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_CHECK: u8 = 3;

#[derive(Parser)]
#[command(name = "crbopt", version, about = "CRB-minimizing transmit beamforming for monostatic MIMO radar")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and print the beamformer.
    Solve(Settings),
    /// Run a sweep over antenna counts and/or power budgets.
    Sweep(Settings),
    /// Run the oracle self-check suite.
    Check(Settings),
    /// Print the version.
    Version,
}

#[derive(Args)]
struct Settings {
    /// TOML file with the same keys as the flags (snake_case).
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    layer: ConfigLayer,
}

impl Settings {
    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let file = match &self.config {
            Some(path) => ConfigLayer::from_file(path)?,
            None => ConfigLayer::default(),
        };
        file.merged(&self.layer)?.resolve()
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::SingularFim { .. }
        | Error::PenaltyTooSmall { .. }
        | Error::NumericalFailure(_)
        | Error::DegenerateInput(_) => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

fn run_solve(config: &ExperimentConfig) -> Result<u8, Error> {
    let scenario = &config.base;
    let mut out = io::stdout().lock();
    let mut code = 0;
    for &solver in config.solver.solvers() {
        let (p, trace) = match solver {
            SolverKind::Lpm => solve(scenario, &config.lpm, None)?,
            SolverKind::Pgd => pgd_solve(scenario, &config.pgd, &initialize(scenario)?)?,
        };
        let lambda = trace.records.last().map_or(f64::NAN, |r| r.lambda);
        let _ = writeln!(out, "solver      {solver}");
        let _ = writeln!(out, "status      {}", trace.status);
        let _ = writeln!(out, "iterations  {}", trace.iterations());
        let _ = writeln!(out, "crb_trace   {:.9e}", trace.final_objective);
        let _ = writeln!(out, "lambda      {lambda:.9e}");
        let _ = writeln!(out, "power       {:.9e}", p.power());
        for (m, w) in p.weights.iter().enumerate() {
            let _ = writeln!(out, "p[{m:>3}]      {:+.9e} {:+.9e}j", w.re, w.im);
        }
        let _ = writeln!(out);
        if trace.status == SolveStatus::NumericalFailure {
            if let Some(msg) = &trace.failure {
                eprintln!("{solver}: {msg}");
            }
            code = EXIT_NUMERICAL;
        }
    }
    Ok(code)
}

fn run_sweep_command(config: &ExperimentConfig) -> Result<u8, Error> {
    let records = run_sweep(config)?;
    if config.out.is_none() {
        write_records(&records, config.format, io::stdout().lock())?;
    }
    Ok(0)
}

fn run_check(config: &ExperimentConfig) -> u8 {
    let report = run_checks(&config.base, &config.lpm);
    print!("{report}");
    if report.passed() {
        0
    } else {
        EXIT_CHECK
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };

    let settings = match &cli.command {
        Command::Version => {
            println!("crbopt {}", env!("CARGO_PKG_VERSION"));
            return ExitCode::SUCCESS;
        }
        Command::Solve(s) | Command::Sweep(s) | Command::Check(s) => s,
    };
    let config = match settings.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let result = match &cli.command {
        Command::Solve(_) => run_solve(&config),
        Command::Sweep(_) => run_sweep_command(&config),
        Command::Check(_) => Ok(run_check(&config)),
        Command::Version => unreachable!(),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
