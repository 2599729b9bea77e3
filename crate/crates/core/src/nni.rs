//! Newton-Noda iteration with the halving procedure for the step length.
//!
//! Each outer step solves the bordered Newton system at `(u_k, lambda_k)`,
//! moves to `w = u_k + theta Delta_k`, normalizes, and resets lambda to the
//! Noda floor of the new vector. `theta` starts at 1 and is halved until the
//! look-ahead residual `h(theta) = r(u_{k+1}, lambda_k)` is positive, which
//! makes `lambda_k` strictly increasing while `u_k` stays positive.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::{
    certify_m_matrix, dot, min_entry, norm2, solve_bordered, BorderedSolution, SymbolicAnalysis,
};
use crate::problem::{IterateState, NaepProblem};

/// Look-ahead residual entries within this fraction of `||A(u) u||` count as positive.
pub const H_POSITIVITY_FLOOR: f64 = 1e-15;

// Runtime invariant tolerances.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;
pub const DELTA_LAMBDA_TOL: f64 = 1e-13;
pub const BORDERED_SLACK_TOL: f64 = 1e-13;
pub const LAMBDA_UPDATE_TOL: f64 = 1e-12;
pub const RESIDUAL_SIGN_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Relative-residual threshold.
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: u32,
    /// Check the positivity / M-matrix / Newton identities at every step and
    /// stop with a numerical error when one fails.
    pub check_invariants: bool,
    /// Keep a record for every iterate; otherwise only the final one is kept.
    pub record_trace: bool,
    /// Optional `(eta, M)` for logging the analytic step-length bound.
    #[serde(default)]
    pub eta_diagnostic: Option<EtaDiagnostic>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-12,
            max_iter: 200,
            max_halvings: 60,
            check_invariants: true,
            record_trace: true,
            eta_diagnostic: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol = {} must be positive", self.tol)));
        }
        if self.max_iter < 1 || self.max_halvings < 1 {
            return Err(Error::InvalidArgument("max_iter and max_halvings must be at least 1".into()));
        }
        Ok(())
    }
}

/// User-supplied constants for the analytic step bound
/// `eta_k = eta delta_k min(u_k) / ((1 + eta) M ||w_{k+1}|| ||Delta_k||^2)`.
/// Only logged; the halving procedure always picks `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaDiagnostic {
    pub eta: f64,
    pub remainder_bound: f64,
}

/// Analytic step bound `eta_k`; `None` when `Delta_k = 0` or an input is not positive.
pub fn eta_step_bound(
    diag: &EtaDiagnostic,
    delta_lambda: f64,
    min_u: f64,
    w_norm: f64,
    delta_norm: f64,
) -> Option<f64> {
    let denom = (1.0 + diag.eta) * diag.remainder_bound * w_norm * delta_norm * delta_norm;
    (denom > 0.0 && diag.eta > 0.0).then(|| diag.eta * delta_lambda * min_u / denom)
}

/// The accepted step of one outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonStep {
    pub theta: f64,
    pub halvings: u32,
    pub delta_norm: f64,
    pub delta_lambda: f64,
    pub w_norm: f64,
    /// `min(h(theta) / u_{k+1})`, which equals `lambda_{k+1} - lambda_k`.
    pub h_min_ratio: f64,
    pub u_next: Vec<f64>,
    pub h: Vec<f64>,
}

/// Candidate produced by [`try_step`] for one value of theta.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCandidate {
    pub u_next: Vec<f64>,
    pub h: Vec<f64>,
    pub w_norm: f64,
}

/// Per-step invariant measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepDiagnostics {
    pub u_dot_delta: f64,
    pub bordered_slack: f64,
    pub min_p: f64,
    /// `J(u) u > 0`; `None` when `gamma = 0`, where the certificate degenerates.
    pub jacobian_certified: Option<bool>,
    /// `(lambda_{k+1} - lambda_k) - min(h / u_{k+1})`
    pub lambda_update_error: f64,
    pub w_norm: f64,
    pub h_min_ratio: f64,
    pub eta_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub k: usize,
    pub lambda: f64,
    pub r_norm: f64,
    pub rel_residual: f64,
    /// Step taken from this iterate; `None` on the final record.
    pub theta: Option<f64>,
    pub halvings: Option<u32>,
    pub min_u: f64,
    pub delta_norm: Option<f64>,
    pub delta_lambda: Option<f64>,
    pub energy: f64,
    #[serde(skip)]
    pub diagnostics: Option<StepDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    HalvingExhausted,
    NumericalError(String),
}

impl SolveStatus {
    pub fn is_converged(&self) -> bool {
        matches!(self, SolveStatus::Converged)
    }
}

/// Ordered per-iterate records plus the terminal status.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveTrace {
    pub records: Vec<TraceRecord>,
    pub status: SolveStatus,
    /// Number of outer steps taken.
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub state: IterateState,
    pub trace: SolveTrace,
}

/// Normalizes `u0` and sets `lambda_0` to its Noda floor.
pub fn initialize(prob: &NaepProblem, u0: &[f64]) -> Result<IterateState> {
    check_len(prob.n(), u0.len())?;
    if let Some(index) = u0.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::PositivityViolation { index, value: u0[index] });
    }
    let norm = norm2(u0);
    let u = u0.iter().map(|x| x / norm).collect();
    IterateState::at(prob, u, 0)
}

/// `||r(u, lambda)||_2 / sqrt(||A(u)||_1 ||A(u)||_inf)`, recomputed from the state's `u` and `lambda`.
pub fn relative_residual(prob: &NaepProblem, state: &IterateState) -> Result<f64> {
    let r = prob.residual(&state.u, state.lambda)?;
    Ok(norm2(&r) / prob.operator_norm_estimate(&state.u)?)
}

/// Forms `w = u + theta Delta`, normalizes it, and evaluates `h = r(u_next, lambda_k)`.
pub fn try_step(
    prob: &NaepProblem,
    state: &IterateState,
    step: &BorderedSolution,
    theta: f64,
) -> Result<StepCandidate> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidArgument(format!("theta = {theta} outside (0, 1]")));
    }
    check_len(state.u.len(), step.delta.len())?;
    let w: Vec<f64> = state.u.iter().zip(&step.delta).map(|(u, d)| u + theta * d).collect();
    if let Some(index) = w.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::PositivityViolation { index, value: w[index] });
    }
    let w_norm = norm2(&w);
    let u_next: Vec<f64> = w.iter().map(|x| x / w_norm).collect();
    let h = prob.residual(&u_next, state.lambda)?;
    Ok(StepCandidate { u_next, h, w_norm })
}

/// Halving procedure: the largest `theta = 2^-j`, `j <= max_halvings`, whose
/// look-ahead residual is positive (up to [`H_POSITIVITY_FLOOR`]).
pub fn choose_theta(
    prob: &NaepProblem,
    state: &IterateState,
    step: &BorderedSolution,
    max_halvings: u32,
) -> Result<NewtonStep> {
    let delta_norm = norm2(&step.delta);
    let mut theta = 1.0;
    for halvings in 0..=max_halvings {
        let candidate = try_step(prob, state, step, theta)?;
        let scale = candidate
            .h
            .iter()
            .zip(&candidate.u_next)
            .map(|(h, u)| (h + state.lambda * u).powi(2))
            .sum::<f64>()
            .sqrt();
        let floor = H_POSITIVITY_FLOOR * scale;
        if candidate.h.iter().all(|&h| h >= -floor) {
            let h_min_ratio = candidate
                .h
                .iter()
                .zip(&candidate.u_next)
                .map(|(h, u)| h / u)
                .fold(f64::INFINITY, f64::min);
            return Ok(NewtonStep {
                theta,
                halvings,
                delta_norm,
                delta_lambda: step.delta_lambda,
                w_norm: candidate.w_norm,
                h_min_ratio,
                u_next: candidate.u_next,
                h: candidate.h,
            });
        }
        theta *= 0.5;
    }
    Err(Error::HalvingExhausted { halvings: max_halvings })
}

fn record_for(prob: &NaepProblem, state: &IterateState) -> Result<TraceRecord> {
    Ok(TraceRecord {
        k: state.k,
        lambda: state.lambda,
        r_norm: state.r_norm,
        rel_residual: state.rel_residual,
        theta: None,
        halvings: None,
        min_u: min_entry(&state.u),
        delta_norm: None,
        delta_lambda: None,
        energy: prob.discrete_energy(&state.u)?,
        diagnostics: None,
    })
}

fn violation(what: impl Into<String>) -> Error {
    Error::InternalConsistency(what.into())
}

/// Solver bound to one problem; reuses the symbolic factorization of `J`
/// (whose pattern is that of `A`) across iterations and solves.
#[derive(Debug, Clone)]
pub struct NniSolver<'p> {
    prob: &'p NaepProblem,
    config: SolverConfig,
    symbolic: SymbolicAnalysis,
}

impl<'p> NniSolver<'p> {
    pub fn new(prob: &'p NaepProblem, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let symbolic = SymbolicAnalysis::new(prob.matrix())?;
        Ok(NniSolver { prob, config, symbolic })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Bordered Newton solution at `state`.
    pub fn newton_direction(&self, state: &IterateState) -> Result<(BorderedSolution, Option<bool>)> {
        let prob = self.prob;
        let jac = prob.jacobian(&state.u, state.lambda)?;
        let certified = if prob.gamma() > 0.0 {
            Some(certify_m_matrix(&jac.matrix, &state.u)?)
        } else {
            None
        };
        let fact = self.symbolic.factorize(&jac.matrix)?;
        Ok((solve_bordered(&fact, &state.u, &state.r)?, certified))
    }

    fn check_iterate(&self, state: &IterateState) -> Result<()> {
        let prob = self.prob;
        if state.lambda > prob.lambda_upper_bound() {
            return Err(violation(format!(
                "lambda = {} exceeds the upper bound {}",
                state.lambda,
                prob.lambda_upper_bound()
            )));
        }
        let scale = norm2(&prob.apply_operator(&state.u, &state.u)?);
        let r_min = min_entry(&state.r);
        if r_min < -RESIDUAL_SIGN_TOL * scale {
            return Err(violation(format!("residual has negative entry {r_min:e}")));
        }
        Ok(())
    }

    fn advance(&self, state: &IterateState) -> Result<(NewtonStep, IterateState, StepDiagnostics)> {
        let prob = self.prob;
        let check = self.config.check_invariants;
        if check {
            self.check_iterate(state)?;
        }
        let (sol, certified) = self.newton_direction(state)?;
        let min_p = min_entry(&sol.p);
        let u_dot_delta = dot(&state.u, &sol.delta);
        if check {
            if certified == Some(false) {
                return Err(violation("J(u) u is not positive"));
            }
            if !(min_p > 0.0) {
                return Err(violation(format!("J^-1 u has nonpositive entry {min_p:e}")));
            }
            if u_dot_delta.abs() > ORTHOGONALITY_TOL {
                return Err(violation(format!("u^T Delta = {u_dot_delta:e}")));
            }
            if sol.delta_lambda < -DELTA_LAMBDA_TOL {
                return Err(violation(format!("delta_lambda = {:e} is negative", sol.delta_lambda)));
            }
            if sol.bordered_slack < -BORDERED_SLACK_TOL {
                return Err(violation(format!("s + u^T q = {:e} is negative", sol.bordered_slack)));
            }
        }

        let step = choose_theta(prob, state, &sol, self.config.max_halvings)?;
        let next = IterateState::at(prob, step.u_next.clone(), state.k + 1)?;
        let lambda_update_error = (next.lambda - state.lambda) - step.h_min_ratio;
        let lambda_scale = 1f64.max(state.lambda.abs()).max(next.lambda.abs());
        if check && lambda_update_error.abs() > LAMBDA_UPDATE_TOL * lambda_scale {
            return Err(violation(format!("lambda update identity off by {lambda_update_error:e}")));
        }

        let eta_bound = self.config.eta_diagnostic.as_ref().and_then(|d| {
            eta_step_bound(d, sol.delta_lambda, min_entry(&state.u), step.w_norm, step.delta_norm)
        });
        let diagnostics = StepDiagnostics {
            u_dot_delta,
            bordered_slack: sol.bordered_slack,
            min_p,
            jacobian_certified: certified,
            lambda_update_error,
            w_norm: step.w_norm,
            h_min_ratio: step.h_min_ratio,
            eta_bound,
        };
        debug!(
            "k={} lambda={:.16e} rel={:.3e} theta={} |Delta|={:.3e} delta={:.3e} eta_k={:?}",
            state.k, state.lambda, state.rel_residual, step.theta, step.delta_norm, sol.delta_lambda, eta_bound
        );
        Ok((step, next, diagnostics))
    }

    /// Runs the iteration from `u0` (any positive vector; it is normalized).
    ///
    /// Invalid input is an `Err`; every failure after the first iterate is
    /// reported through the trace status with the partial trace kept.
    pub fn solve(&self, u0: &[f64]) -> Result<SolveOutcome> {
        let prob = self.prob;
        let mut state = initialize(prob, u0)?;
        let mut records = Vec::new();
        let status = loop {
            let mut record = record_for(prob, &state)?;
            if state.rel_residual <= self.config.tol {
                records.push(record);
                break SolveStatus::Converged;
            }
            if state.k >= self.config.max_iter {
                records.push(record);
                break SolveStatus::MaxIterations;
            }
            match self.advance(&state) {
                Ok((step, next, diagnostics)) => {
                    record.theta = Some(step.theta);
                    record.halvings = Some(step.halvings);
                    record.delta_norm = Some(step.delta_norm);
                    record.delta_lambda = Some(step.delta_lambda);
                    record.diagnostics = Some(diagnostics);
                    if self.config.record_trace {
                        records.push(record);
                    }
                    state = next;
                }
                Err(Error::HalvingExhausted { .. }) => {
                    records.push(record);
                    break SolveStatus::HalvingExhausted;
                }
                Err(err) => {
                    records.push(record);
                    break SolveStatus::NumericalError(err.to_string());
                }
            }
        };
        let iterations = state.k;
        Ok(SolveOutcome { state, trace: SolveTrace { records, status, iterations } })
    }
}

/// One-shot solve; see [`NniSolver::solve`].
pub fn solve(prob: &NaepProblem, u0: &[f64], config: &SolverConfig) -> Result<SolveOutcome> {
    NniSolver::new(prob, *config)?.solve(u0)
}

/// The starting vector `(1/sqrt(n)) [1, ..., 1]`.
pub fn uniform_start(n: usize) -> Vec<f64> {
    vec![1.0 / (n as f64).sqrt(); n]
}
