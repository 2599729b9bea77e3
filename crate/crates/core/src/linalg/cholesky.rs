//! Up-looking sparse Cholesky `P M P^T = L L^T` for symmetric positive definite
//! matrices, with the symbolic phase (ordering, elimination tree, column
//! counts) separated so it can be reused while the values change.

use super::ordering::{invert_permutation, nested_dissection};
use super::sparse::SparseMatrix;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub(crate) struct CholeskySymbolic {
    n: usize,
    perm: Vec<usize>,
    parent: Vec<usize>,
    col_ptr: Vec<usize>,
    // lower triangle of P M P^T by rows: column index and source position in M's values
    lower_ptr: Vec<usize>,
    lower_col: Vec<usize>,
    lower_src: Vec<usize>,
}

/// Cholesky factor stored by columns, diagonal first in each column.
#[derive(Debug, Clone)]
pub(crate) struct CholeskyFactor {
    perm: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Breakdown of the numeric phase: nonpositive pivot at elimination step `pivot`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct NotPositiveDefinite {
    pub pivot: usize,
}

/// Nonzero pattern of row `k` of `L`, in topological order, written to `out`.
fn ereach(
    k: usize,
    lower_cols: &[usize],
    parent: &[usize],
    mark: &mut [usize],
    path: &mut Vec<usize>,
    out: &mut Vec<usize>,
) {
    out.clear();
    mark[k] = k;
    for &j in lower_cols {
        if j >= k {
            continue;
        }
        path.clear();
        let mut i = j;
        while mark[i] != k {
            path.push(i);
            mark[i] = k;
            i = parent[i];
        }
        // prepend so that deeper paths come first
        out.extend(path.iter().rev());
    }
    out.reverse();
}

impl CholeskySymbolic {
    /// `m` must be square with a symmetric pattern.
    pub(crate) fn analyze(m: &SparseMatrix) -> CholeskySymbolic {
        let n = m.n_rows();
        let perm = nested_dissection(m);
        let pinv = invert_permutation(&perm);

        let mut rows: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for i in 0..n {
            let k = pinv[i];
            for p in m.row_ptr()[i]..m.row_ptr()[i + 1] {
                let j = pinv[m.col_idx()[p]];
                if j <= k {
                    rows[k].push((j, p));
                }
            }
        }
        let mut lower_ptr = Vec::with_capacity(n + 1);
        let mut lower_col = Vec::new();
        let mut lower_src = Vec::new();
        lower_ptr.push(0);
        for row in &mut rows {
            row.sort_unstable();
            for &(j, p) in row.iter() {
                lower_col.push(j);
                lower_src.push(p);
            }
            lower_ptr.push(lower_col.len());
        }

        // elimination tree with path compression through `ancestor`
        let mut parent = vec![NONE; n];
        let mut ancestor = vec![NONE; n];
        for k in 0..n {
            for &j in &lower_col[lower_ptr[k]..lower_ptr[k + 1]] {
                let mut i = j;
                while i != NONE && i < k {
                    let next = ancestor[i];
                    ancestor[i] = k;
                    if next == NONE {
                        parent[i] = k;
                    }
                    i = next;
                }
            }
        }

        let mut counts = vec![1usize; n];
        let mut mark = vec![NONE; n];
        let mut path = Vec::new();
        let mut reach = Vec::new();
        for k in 0..n {
            ereach(k, &lower_col[lower_ptr[k]..lower_ptr[k + 1]], &parent, &mut mark, &mut path, &mut reach);
            for &j in &reach {
                counts[j] += 1;
            }
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        col_ptr.push(0);
        for c in counts {
            col_ptr.push(col_ptr.last().unwrap() + c);
        }

        CholeskySymbolic { n, perm, parent, col_ptr, lower_ptr, lower_col, lower_src }
    }

    pub(crate) fn factor_nnz(&self) -> usize {
        self.col_ptr[self.n]
    }

    /// Numeric factorization of a matrix with the analyzed pattern. A pivot
    /// `d` with `d <= tol * max|M(:, k)|` counts as a breakdown.
    pub(crate) fn factorize(
        &self,
        m: &SparseMatrix,
        pivot_tol: f64,
    ) -> Result<CholeskyFactor, NotPositiveDefinite> {
        let n = self.n;
        let vals = m.values();
        let nnz = self.factor_nnz();
        let mut row_idx = vec![0usize; nnz];
        let mut lx = vec![0.0; nnz];
        let mut next: Vec<usize> = self.col_ptr[..n].to_vec();
        let mut x = vec![0.0; n];
        let mut mark = vec![NONE; n];
        let mut path = Vec::new();
        let mut reach = Vec::new();

        for k in 0..n {
            let cols = &self.lower_col[self.lower_ptr[k]..self.lower_ptr[k + 1]];
            ereach(k, cols, &self.parent, &mut mark, &mut path, &mut reach);
            for (&j, &src) in cols.iter().zip(&self.lower_src[self.lower_ptr[k]..self.lower_ptr[k + 1]]) {
                x[j] = vals[src];
            }
            let original = self.perm[k];
            let col_max = m.row(original).map(|(_, v)| v.abs()).fold(0.0, f64::max);

            let mut d = x[k];
            x[k] = 0.0;
            for &i in &reach {
                let lki = x[i] / lx[self.col_ptr[i]];
                x[i] = 0.0;
                for q in self.col_ptr[i] + 1..next[i] {
                    x[row_idx[q]] -= lx[q] * lki;
                }
                d -= lki * lki;
                row_idx[next[i]] = k;
                lx[next[i]] = lki;
                next[i] += 1;
            }
            if !(d > pivot_tol * col_max) {
                return Err(NotPositiveDefinite { pivot: k });
            }
            row_idx[next[k]] = k;
            lx[next[k]] = d.sqrt();
            next[k] += 1;
        }

        Ok(CholeskyFactor { perm: self.perm.clone(), col_ptr: self.col_ptr.clone(), row_idx, values: lx })
    }
}

impl CholeskyFactor {
    pub(crate) fn nnz(&self) -> usize {
        self.values.len()
    }

    pub(crate) fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.perm.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for j in 0..n {
            let start = self.col_ptr[j];
            y[j] /= self.values[start];
            let yj = y[j];
            for q in start + 1..self.col_ptr[j + 1] {
                y[self.row_idx[q]] -= self.values[q] * yj;
            }
        }
        for j in (0..n).rev() {
            let start = self.col_ptr[j];
            let mut acc = y[j];
            for q in start + 1..self.col_ptr[j + 1] {
                acc -= self.values[q] * y[self.row_idx[q]];
            }
            y[j] = acc / self.values[start];
        }
        for (k, &i) in self.perm.iter().enumerate() {
            b[i] = y[k];
        }
    }
}
