//! `hermfd solve` and `hermfd study`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 unsolvable
//! boundary closure, 3 singular linear system, 4 I/O failure, 5 anything else.
//! Errors are reported on stderr as a single JSON object.

mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hermfd::convergence::{accuracy_study, truncation_study, truncation_study_with_pointwise};
use hermfd::problem::{by_name, problem1_with, ConstantCoefficients, Problem};
use hermfd::{solve_bvp, Error};
use serde::Serialize;

use config::{Common, Kind, RunConfig};

#[derive(Parser)]
#[command(name = "hermfd", version, about = "Compact fourth-order solver for fourth-order two-point problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem on one grid and write the nodal fields.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Number of cells.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run a grid-refinement study and write the error/rate table.
    Study {
        #[command(flatten)]
        common: Common,
        /// Ascending mesh sizes, comma-separated.
        #[arg(long, value_delimiter = ',')]
        ns: Option<Vec<usize>>,
        #[arg(long, value_enum)]
        kind: Option<Kind>,
        /// Where to write pointwise convergence slopes (truncation studies).
        #[arg(long)]
        pointwise_out: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Solver(Error),
    Other(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Solver(Error::SolvabilityViolation { .. }) => 2,
            CliError::Solver(Error::SingularSystem { .. }) => 3,
            CliError::Solver(Error::UnknownProblem(_) | Error::InvalidMeshes(_) | Error::InvalidGrid(_)) => 1,
            CliError::Io(_) => 4,
            CliError::Solver(_) | CliError::Other(_) => 5,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Solver(Error::SolvabilityViolation { .. }) => "solvability_violation",
            CliError::Solver(Error::SingularSystem { .. }) => "singular_system",
            CliError::Solver(Error::UnknownProblem(_)) => "unknown_problem",
            CliError::Solver(Error::InvalidMeshes(_) | Error::InvalidGrid(_)) => "invalid_mesh",
            CliError::Solver(_) => "solver",
            CliError::Other(_) => "internal",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(m) | CliError::Io(m) | CliError::Other(m) => m.clone(),
            CliError::Solver(e) => e.to_string(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Solver(e)
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
    exit_code: u8,
}

fn problem(cfg: &RunConfig) -> Result<Problem, CliError> {
    let base = by_name(&cfg.problem)?;
    if cfg.coef.iter().all(Option::is_none) {
        return Ok(base);
    }
    let d = ConstantCoefficients::default();
    let [a, b, dd, h] = cfg.coef;
    Ok(problem1_with(ConstantCoefficients {
        a: a.unwrap_or(d.a),
        b: b.unwrap_or(d.b),
        d: dd.unwrap_or(d.d),
        h: h.unwrap_or(d.h),
    }))
}

fn emit(path: Option<&PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve { common, n } => {
            let cfg = config::resolve(&common, None, n.map(|n| vec![n]), None, true)?;
            let p = problem(&cfg)?;
            let sol = solve_bvp(&p.spec(cfg.ns[0])?)?;
            emit(cfg.out.as_ref(), &output::solution(&p.name, &sol, cfg.format)?)
        }
        Command::Study { common, ns, kind, pointwise_out } => {
            let cfg = config::resolve(&common, kind, ns, pointwise_out, false)?;
            let p = problem(&cfg)?;
            let report = match (cfg.kind, &cfg.pointwise_out) {
                (Kind::Accuracy, _) => accuracy_study(&p, &cfg.ns)?,
                (Kind::Truncation, None) => truncation_study(&p, &cfg.ns)?,
                _ => truncation_study_with_pointwise(&p, &cfg.ns)?,
            };
            emit(cfg.out.as_ref(), &output::report(&report, cfg.format)?)?;
            if let Some(path) = &cfg.pointwise_out {
                emit(Some(path), &output::pointwise(&report.pointwise, cfg.format)?)?;
            }
            Ok(())
        }
    }
}

fn fail(err: CliError) -> ExitCode {
    let code = err.code();
    let report = ErrorReport { error: err.kind(), message: err.message(), exit_code: code };
    eprintln!("{}", serde_json::to_string(&report).unwrap_or_else(|_| format!("{{\"exit_code\":{code}}}")));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(CliError::Config(e.to_string().trim_end().to_string())),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}
