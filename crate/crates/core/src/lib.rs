//! Newton-Noda iteration (NNI) for the positive ground state of the discrete
//! saturable nonlinear Schrodinger eigenproblem
//!
//! ```text
//! A u + Gamma diag(1 - 1/(a + u^2)) u = lambda u,    ||u||_2 = 1,    u > 0.
//! ```
//!
//! * [`problem`] holds the instance and its operators (residual, Noda floor, Jacobian).
//! * [`linalg`] provides CSR storage, M-matrix validators, sparse Cholesky/LU and
//!   the bordered Newton solve.
//! * [`nni`] is the iteration driver with the halving procedure and trace.
//! * [`verify`] contains dense oracles and post-hoc trace checks.
//!
//! ```
//! use nni_core::{build_laplacian_2d, solve, uniform_start, NaepProblem, SolverConfig};
//!
//! let a = build_laplacian_2d(8, false).unwrap();
//! let prob = NaepProblem::new(a, vec![1.5; 64], 10.0).unwrap();
//! let out = solve(&prob, &uniform_start(64), &SolverConfig::default()).unwrap();
//! assert!(out.trace.status.is_converged());
//! assert!(out.state.u.iter().all(|&x| x > 0.0));
//! ```

// `!(x > 0.0)` is used on purpose so that NaN fails positivity checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod linalg;
pub mod nni;
pub mod problem;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{factorize, solve_bordered, BorderedSolution, Factorization, SparseMatrix};
pub use nni::{
    choose_theta, initialize, relative_residual, solve, try_step, uniform_start, NewtonStep, NniSolver,
    SolveOutcome, SolveStatus, SolveTrace, SolverConfig, TraceRecord,
};
pub use problem::{build_laplacian_1d, build_laplacian_2d, IterateState, JacobianMatrix, NaepProblem};
