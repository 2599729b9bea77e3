//! Experiment runner for the Newton-Noda solver: seeded grid problems,
//! parameter sweeps, the nine-row iteration table and trace serialization.

pub mod config;
pub mod error;
pub mod experiment;
pub mod generate;
pub mod output;

pub use config::{AMode, ExperimentConfig, OutputFormat};
pub use error::{exit_code, CliError, Result};
pub use experiment::{
    first_step_oracle, run_experiment, run_gamma_sweep, run_on_problem, run_table1, run_table1_with, status_label,
    ExperimentRun, SweepRow, Table1, Table1Row,
};
pub use generate::generate_a;
pub use output::{write_rows_csv, write_run, write_trace_csv, TRACE_COLUMNS};
