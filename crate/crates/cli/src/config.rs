use std::path::PathBuf;

use clap::ValueEnum;
use nni_core::linalg::read_matrix_market_file;
use nni_core::{build_laplacian_1d, build_laplacian_2d, NaepProblem, SolverConfig, SparseMatrix};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::generate::generate_a;

/// Distribution of the saturation vector `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum AMode {
    /// `a_i` in `[1, 2)`
    Ge1,
    /// `a_i` in `[1e-3, 1)`
    UnitInterval,
    /// `a_i` in `[1e-3, 2 + 1e-3)`
    Positive,
}

impl AMode {
    pub const ALL: [AMode; 3] = [AMode::Ge1, AMode::UnitInterval, AMode::Positive];

    pub fn name(self) -> &'static str {
        match self {
            AMode::Ge1 => "ge1",
            AMode::UnitInterval => "unit_interval",
            AMode::Positive => "positive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub grid_dim: usize,
    pub m: usize,
    pub gamma: f64,
    pub a_mode: AMode,
    pub a_seed: u64,
    pub scale_by_h2: bool,
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: u32,
    /// Read `A` from this MatrixMarket file instead of building a grid Laplacian.
    pub matrix_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
    pub oracle_check: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let solver = SolverConfig::default();
        ExperimentConfig {
            grid_dim: 2,
            m: 10,
            gamma: 10.0,
            a_mode: AMode::Ge1,
            a_seed: 0,
            scale_by_h2: false,
            tol: solver.tol,
            max_iter: solver.max_iter,
            max_halvings: solver.max_halvings,
            matrix_path: None,
            output_path: None,
            format: OutputFormat::Csv,
            oracle_check: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.matrix_path.is_none() {
            if !matches!(self.grid_dim, 1 | 2) {
                return Err(CliError::Config(format!("grid_dim must be 1 or 2, got {}", self.grid_dim)));
            }
            if self.m < 2 {
                return Err(CliError::Config(format!("grid side m must be at least 2, got {}", self.m)));
            }
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(CliError::Config(format!("gamma must be finite and nonnegative, got {}", self.gamma)));
        }
        self.solver_config().validate()?;
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            max_halvings: self.max_halvings,
            ..SolverConfig::default()
        }
    }

    pub fn build_matrix(&self) -> Result<SparseMatrix> {
        if let Some(path) = &self.matrix_path {
            return Ok(read_matrix_market_file(path)?);
        }
        let matrix = match self.grid_dim {
            1 => build_laplacian_1d(self.m, self.scale_by_h2)?,
            _ => build_laplacian_2d(self.m, self.scale_by_h2)?,
        };
        Ok(matrix)
    }

    pub fn build_problem(&self) -> Result<NaepProblem> {
        self.validate()?;
        let matrix = self.build_matrix()?;
        let a = generate_a(matrix.n_rows(), self.a_mode, self.a_seed);
        Ok(NaepProblem::new(matrix, a, self.gamma)?)
    }
}
