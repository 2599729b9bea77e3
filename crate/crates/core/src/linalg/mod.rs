//! Sparse storage, M-matrix validators, direct factorizations and the
//! bordered Newton solve.

mod bordered;
mod cholesky;
mod factor;
mod lu;
mod mtx;
mod ordering;
mod sparse;

pub use bordered::{solve_bordered, BorderedSolution};
pub use factor::{factorize, FactorKind, Factorization, SymbolicAnalysis, SINGULAR_PIVOT_TOL};
pub use mtx::{read_matrix_market, read_matrix_market_file, write_matrix_market, write_matrix_market_file};
pub use ordering::{invert_permutation, nested_dissection};
pub use sparse::{certify_m_matrix, validate_irreducible, validate_z_pattern, SparseMatrix};

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn min_entry(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}
