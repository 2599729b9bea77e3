use std::time::Instant;

use log::{info, warn};
use nni_core::verify::{compare_vectors, dense_bordered_oracle, OracleReport, DENSE_ORACLE_MAX_N};
use nni_core::{initialize, solve, uniform_start, NaepProblem, NniSolver, SolveOutcome, SolveStatus};
use serde::Serialize;

use crate::config::{AMode, ExperimentConfig};
use crate::error::{CliError, Result};

/// Tolerance for the sparse-vs-dense comparison of the first Newton step.
pub const ORACLE_TOL: f64 = 1e-11;

/// Grid sides of the nine-row table (n = 2500, 10000, 40000).
pub const TABLE1_GRID_SIDES: [usize; 3] = [50, 100, 200];
pub const TABLE1_GAMMA: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub config: ExperimentConfig,
    pub outcome: SolveOutcome,
    pub wall_time_seconds: f64,
    /// First-step comparison against the dense bordered solve, when requested.
    pub oracle: Option<OracleReport>,
}

pub fn status_label(status: &SolveStatus) -> &'static str {
    match status {
        SolveStatus::Converged => "converged",
        SolveStatus::MaxIterations => "max_iterations",
        SolveStatus::HalvingExhausted => "halving_exhausted",
        SolveStatus::NumericalError(_) => "numerical_error",
    }
}

/// Builds the problem from `config` and solves it from the uniform start.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRun> {
    let prob = config.build_problem()?;
    run_on_problem(&prob, config)
}

pub fn run_on_problem(prob: &NaepProblem, config: &ExperimentConfig) -> Result<ExperimentRun> {
    let n = prob.n();
    let u0 = uniform_start(n);
    let oracle = if config.oracle_check {
        if n <= DENSE_ORACLE_MAX_N {
            Some(first_step_oracle(prob, &u0)?)
        } else {
            warn!("oracle check skipped: n = {n} exceeds {DENSE_ORACLE_MAX_N}");
            None
        }
    } else {
        None
    };

    let start = Instant::now();
    let outcome = solve(prob, &u0, &config.solver_config())?;
    let wall_time_seconds = start.elapsed().as_secs_f64();
    info!(
        "n = {n}, gamma = {}, {}: {} after {} iterations, lambda = {}, {:.3}s",
        prob.gamma(),
        config.a_mode.name(),
        status_label(&outcome.trace.status),
        outcome.trace.iterations,
        outcome.state.lambda,
        wall_time_seconds
    );
    Ok(ExperimentRun { config: config.clone(), outcome, wall_time_seconds, oracle })
}

/// Compares the block-elimination step at `u0` with the dense bordered solve.
pub fn first_step_oracle(prob: &NaepProblem, u0: &[f64]) -> Result<OracleReport> {
    let state = initialize(prob, u0)?;
    let solver = NniSolver::new(prob, Default::default())?;
    let (step, _) = solver.newton_direction(&state)?;
    let (mut reference, delta_lambda) = dense_bordered_oracle(prob, &state.u, state.lambda)?;
    reference.push(delta_lambda);
    let mut candidate = step.delta;
    candidate.push(step.delta_lambda);
    Ok(compare_vectors(&reference, &candidate, ORACLE_TOL)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub status: String,
    pub iterations: Option<usize>,
    pub lambda: Option<f64>,
    pub rel_residual: Option<f64>,
    pub error: Option<String>,
}

/// One run per gamma with everything else taken from `base`; a failing row is
/// recorded and the sweep continues.
pub fn run_gamma_sweep(base: &ExperimentConfig, gammas: &[f64]) -> Result<Vec<SweepRow>> {
    if gammas.is_empty() {
        return Err(CliError::Config("gamma sweep needs at least one value".into()));
    }
    Ok(gammas
        .iter()
        .map(|&gamma| {
            let config = ExperimentConfig { gamma, ..base.clone() };
            match run_experiment(&config) {
                Ok(run) => SweepRow {
                    gamma,
                    status: status_label(&run.outcome.trace.status).into(),
                    iterations: Some(run.outcome.trace.iterations),
                    lambda: Some(run.outcome.state.lambda),
                    rel_residual: Some(run.outcome.state.rel_residual),
                    error: match &run.outcome.trace.status {
                        SolveStatus::NumericalError(msg) => Some(msg.clone()),
                        _ => None,
                    },
                },
                Err(err) => SweepRow {
                    gamma,
                    status: "error".into(),
                    iterations: None,
                    lambda: None,
                    rel_residual: None,
                    error: Some(err.to_string()),
                },
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub n: usize,
    pub a_mode: AMode,
    pub seed: u64,
    pub status: String,
    pub iterations: usize,
    pub rel_residual: f64,
    pub total_halvings: u32,
    /// Halvings over the last three steps; zero when they all took full steps.
    pub final_halvings: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1 {
    pub rows: Vec<Table1Row>,
    pub wall_time_seconds: f64,
}

impl Table1 {
    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.status == "converged")
    }
}

/// The nine-row table on the h^2-scaled grid Laplacian with gamma = 10.
pub fn run_table1(seed: u64) -> Result<Table1> {
    run_table1_with(seed, true)
}

pub fn run_table1_with(seed: u64, scale_by_h2: bool) -> Result<Table1> {
    let start = Instant::now();
    let mut rows = Vec::new();
    for m in TABLE1_GRID_SIDES {
        for a_mode in AMode::ALL {
            let config = ExperimentConfig {
                grid_dim: 2,
                m,
                gamma: TABLE1_GAMMA,
                a_mode,
                a_seed: seed,
                scale_by_h2,
                ..ExperimentConfig::default()
            };
            let run = run_experiment(&config)?;
            rows.push(table1_row(&run));
        }
    }
    Ok(Table1 { rows, wall_time_seconds: start.elapsed().as_secs_f64() })
}

fn table1_row(run: &ExperimentRun) -> Table1Row {
    let trace = &run.outcome.trace;
    let halvings: Vec<u32> = trace.records.iter().filter_map(|r| r.halvings).collect();
    Table1Row {
        n: run.outcome.state.u.len(),
        a_mode: run.config.a_mode,
        seed: run.config.a_seed,
        status: status_label(&trace.status).into(),
        iterations: trace.iterations,
        rel_residual: run.outcome.state.rel_residual,
        total_halvings: halvings.iter().sum(),
        final_halvings: halvings.iter().rev().take(3).sum(),
    }
}
