use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;
use nni_cli::error::{EXIT_CONVERGED, EXIT_IO_OR_CONFIG};
use nni_cli::experiment::TABLE1_GAMMA;
use nni_cli::output::open_output;
use nni_cli::{
    exit_code, run_experiment, run_gamma_sweep, run_table1_with, write_rows_csv, write_run, AMode, CliError,
    ExperimentConfig, OutputFormat,
};
use nni_core::linalg::write_matrix_market;
use nni_core::SolverConfig;

/// Positive ground states of the discrete saturable NLS eigenproblem by Newton-Noda iteration.
#[derive(Debug, Parser)]
#[command(name = "nni", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one problem and write its iteration trace.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Read A from a MatrixMarket file instead of building a grid Laplacian.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Compare the first Newton step with a dense bordered solve (n <= 512).
        #[arg(long)]
        oracle_check: bool,
    },
    /// Iteration counts over a list of gamma values (CSV summary).
    GammaSweep {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Comma-separated gamma values.
        #[arg(long, value_delimiter = ',', required = true)]
        gammas: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The nine-row table: n in {2500, 10000, 40000} by the three a-modes, gamma = 10.
    Table1 {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the unscaled stencil instead of the 1/h^2-scaled one.
        #[arg(long)]
        unscaled: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a grid Laplacian in MatrixMarket format.
    ExportMatrix {
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
        grid_dim: u8,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        scale_by_h2: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct ProblemArgs {
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    grid_dim: u8,
    /// Grid side; n = m or m^2.
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, default_value_t = TABLE1_GAMMA)]
    gamma: f64,
    #[arg(long, value_enum, default_value_t = AMode::Ge1)]
    a_mode: AMode,
    #[arg(long, default_value_t = 0)]
    a_seed: u64,
    /// Multiply the stencil by 1/h^2, h = 1/(m+1).
    #[arg(long)]
    scale_by_h2: bool,
    #[arg(long, default_value_t = SolverConfig::default().tol)]
    tol: f64,
    #[arg(long, default_value_t = SolverConfig::default().max_iter)]
    max_iter: usize,
    #[arg(long, default_value_t = SolverConfig::default().max_halvings)]
    max_halvings: u32,
}

impl ProblemArgs {
    fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            grid_dim: self.grid_dim as usize,
            m: self.m,
            gamma: self.gamma,
            a_mode: self.a_mode,
            a_seed: self.a_seed,
            scale_by_h2: self.scale_by_h2,
            tol: self.tol,
            max_iter: self.max_iter,
            max_halvings: self.max_halvings,
            ..ExperimentConfig::default()
        }
    }
}

fn run(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Solve { problem, matrix, format, out, oracle_check } => {
            let config = ExperimentConfig {
                matrix_path: matrix,
                output_path: out.clone(),
                format,
                oracle_check,
                ..problem.config()
            };
            let run = run_experiment(&config)?;
            write_run(&run, format, open_output(out.as_deref())?)?;
            if let Some(report) = run.oracle.as_ref().filter(|r| !r.passed) {
                error!("first-step oracle mismatch: {report:?}");
                return Ok(nni_cli::error::EXIT_NUMERICAL_ERROR);
            }
            Ok(exit_code(&run.outcome.trace.status))
        }
        Command::GammaSweep { problem, gammas, out } => {
            let rows = run_gamma_sweep(&problem.config(), &gammas)?;
            write_rows_csv(&rows, open_output(out.as_deref())?)?;
            Ok(rows_exit_code(rows.iter().map(|r| r.status.as_str())))
        }
        Command::Table1 { seed, unscaled, out } => {
            let table = run_table1_with(seed, !unscaled)?;
            write_rows_csv(&table.rows, open_output(out.as_deref())?)?;
            log::info!("table finished in {:.2}s", table.wall_time_seconds);
            Ok(rows_exit_code(table.rows.iter().map(|r| r.status.as_str())))
        }
        Command::ExportMatrix { grid_dim, m, scale_by_h2, out } => {
            let config = ExperimentConfig { grid_dim: grid_dim as usize, m, scale_by_h2, ..ExperimentConfig::default() };
            config.validate()?;
            let matrix = config.build_matrix()?;
            write_matrix_market(&matrix, true, open_output(out.as_deref())?)?;
            Ok(EXIT_CONVERGED)
        }
    }
}

/// First non-converged row decides the exit code.
fn rows_exit_code<'a>(statuses: impl Iterator<Item = &'a str>) -> i32 {
    use nni_cli::error::*;
    statuses
        .map(|s| match s {
            "converged" => EXIT_CONVERGED,
            "max_iterations" => EXIT_MAX_ITERATIONS,
            "halving_exhausted" => EXIT_HALVING_EXHAUSTED,
            "numerical_error" => EXIT_NUMERICAL_ERROR,
            _ => EXIT_IO_OR_CONFIG,
        })
        .find(|&code| code != EXIT_CONVERGED)
        .unwrap_or(EXIT_CONVERGED)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            let code = if err.use_stderr() { EXIT_IO_OR_CONFIG } else { EXIT_CONVERGED };
            return ExitCode::from(code as u8);
        }
    };
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            error!("{err}");
            eprintln!("error: {err}");
            EXIT_IO_OR_CONFIG
        }
    };
    ExitCode::from(code as u8)
}
