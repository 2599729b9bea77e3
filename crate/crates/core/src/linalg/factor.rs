use super::cholesky::{CholeskyFactor, CholeskySymbolic};
use super::lu::{self, LuFactor};
use super::ordering::nested_dissection;
use super::sparse::SparseMatrix;
use crate::error::{check_len, Error, Result};

/// Pivots below this fraction of the largest entry in their column are singular.
pub const SINGULAR_PIVOT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    Cholesky,
    Lu,
}

#[derive(Debug, Clone)]
enum Factor {
    Cholesky(CholeskyFactor),
    Lu(LuFactor),
}

/// A factored nonsingular square matrix, ready for repeated solves.
#[derive(Debug, Clone)]
pub struct Factorization {
    n: usize,
    symmetric: bool,
    factor: Factor,
}

impl Factorization {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Whether the factored matrix was exactly symmetric.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn kind(&self) -> FactorKind {
        match self.factor {
            Factor::Cholesky(_) => FactorKind::Cholesky,
            Factor::Lu(_) => FactorKind::Lu,
        }
    }

    /// Stored entries in the triangular factors.
    pub fn factor_nnz(&self) -> usize {
        match &self.factor {
            Factor::Cholesky(f) => f.nnz(),
            Factor::Lu(f) => f.nnz(),
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, b: &mut [f64]) -> Result<()> {
        check_len(self.n, b.len())?;
        match &self.factor {
            Factor::Cholesky(f) => f.solve_in_place(b),
            Factor::Lu(f) => f.solve_in_place(b),
        }
        Ok(())
    }
}

/// Ordering and symbolic factorization for a fixed sparsity pattern.
///
/// Computing this once and calling [`SymbolicAnalysis::factorize`] for every
/// new set of values skips the graph work on repeated factorizations.
#[derive(Debug, Clone)]
pub struct SymbolicAnalysis {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    cholesky: Option<CholeskySymbolic>,
    lu_order: Vec<usize>,
}

impl SymbolicAnalysis {
    pub fn new(m: &SparseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidArgument(format!(
                "cannot factor a {}x{} matrix",
                m.n_rows(),
                m.n_cols()
            )));
        }
        let t = m.transpose();
        let pattern_symmetric = t.row_ptr() == m.row_ptr() && t.col_idx() == m.col_idx();
        let cholesky = pattern_symmetric.then(|| CholeskySymbolic::analyze(m));
        let lu_order = match &cholesky {
            Some(_) => nested_dissection(m),
            None => {
                // order on the pattern of M + M^T
                let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * m.nnz());
                for i in 0..m.n_rows() {
                    for (j, _) in m.row(i) {
                        triplets.push((i, j, 1.0));
                        triplets.push((j, i, 1.0));
                    }
                }
                nested_dissection(&SparseMatrix::from_triplets(m.n_rows(), m.n_cols(), &triplets)?)
            }
        };
        Ok(SymbolicAnalysis {
            n: m.n_rows(),
            row_ptr: m.row_ptr().to_vec(),
            col_idx: m.col_idx().to_vec(),
            cholesky,
            lu_order,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Numeric factorization of `m`, which must have the analyzed pattern.
    ///
    /// Symmetric matrices with a positive diagonal go through Cholesky; if
    /// that breaks down (indefinite matrix) or the matrix is unsymmetric the
    /// LU path is used.
    pub fn factorize(&self, m: &SparseMatrix) -> Result<Factorization> {
        if m.row_ptr() != self.row_ptr.as_slice() || m.col_idx() != self.col_idx.as_slice() {
            return Err(Error::Structural("matrix pattern differs from the analyzed pattern".into()));
        }
        let symmetric = m.is_symmetric();
        if let Some(symbolic) = self.cholesky.as_ref().filter(|_| symmetric) {
            if m.diagonal().iter().all(|&d| d > 0.0) {
                if let Ok(f) = symbolic.factorize(m, SINGULAR_PIVOT_TOL) {
                    return Ok(Factorization { n: self.n, symmetric, factor: Factor::Cholesky(f) });
                }
            }
        }
        let f = lu::factorize(m, &self.lu_order, SINGULAR_PIVOT_TOL)?;
        Ok(Factorization { n: self.n, symmetric, factor: Factor::Lu(f) })
    }
}

/// One-shot symbolic plus numeric factorization.
pub fn factorize(m: &SparseMatrix) -> Result<Factorization> {
    SymbolicAnalysis::new(m)?.factorize(m)
}
