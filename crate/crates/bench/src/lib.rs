//! Shared fixtures for the solver benchmarks.

use nni_core::{build_laplacian_2d, NaepProblem};

/// Grid problem of side `m` with a smooth saturation profile in `[1, 2]`.
pub fn grid_problem(m: usize, gamma: f64) -> NaepProblem {
    let a = build_laplacian_2d(m, false).expect("m >= 2");
    let n = m * m;
    let sat = (0..n).map(|i| 1.0 + ((i * 7919) % 101) as f64 / 100.0).collect();
    NaepProblem::new(a, sat, gamma).expect("valid grid problem")
}
