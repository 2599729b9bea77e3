use std::collections::VecDeque;

use crate::error::{check_len, Error, Result};

/// Real matrix in compressed sparse row form.
///
/// Column indices are strictly increasing within each row, so duplicates are
/// impossible and `get` can binary-search. Explicitly stored zeros are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays, validating their consistency.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::InvalidArgument("matrix dimensions must be positive".into()));
        }
        check_len(n_rows + 1, row_ptr.len())?;
        check_len(col_idx.len(), values.len())?;
        if row_ptr[0] != 0 || row_ptr[n_rows] != col_idx.len() {
            return Err(Error::Structural("row_ptr must start at 0 and end at nnz".into()));
        }
        for i in 0..n_rows {
            let (start, end) = (row_ptr[i], row_ptr[i + 1]);
            if start > end {
                return Err(Error::Structural(format!("row_ptr decreases at row {i}")));
            }
            let cols = &col_idx[start..end];
            if cols.iter().any(|&c| c >= n_cols) {
                return Err(Error::Structural(format!("column index out of range in row {i}")));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Structural(format!(
                    "column indices not strictly increasing in row {i}"
                )));
            }
        }
        Ok(SparseMatrix { n_rows, n_cols, row_ptr, col_idx, values })
    }

    /// Assembles from `(row, col, value)` triplets in any order; duplicates are summed.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::InvalidArgument("matrix dimensions must be positive".into()));
        }
        let mut counts = vec![0usize; n_rows + 1];
        for &(i, j, _) in triplets {
            if i >= n_rows || j >= n_cols {
                return Err(Error::InvalidArgument(format!(
                    "triplet ({i}, {j}) outside a {n_rows}x{n_cols} matrix"
                )));
            }
            counts[i + 1] += 1;
        }
        for i in 0..n_rows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut entries = vec![(0usize, 0.0f64); triplets.len()];
        for &(i, j, v) in triplets {
            entries[next[i]] = (j, v);
            next[i] += 1;
        }

        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        for i in 0..n_rows {
            let row = &mut entries[counts[i]..counts[i + 1]];
            row.sort_by_key(|&(j, _)| j);
            for &(j, v) in row.iter() {
                if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseMatrix { n_rows, n_cols, row_ptr, col_idx, values })
    }

    /// Keeps every nonzero of a dense row-major matrix.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            check_len(n_cols, row.len())?;
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n_rows, n_cols, &triplets)
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable access to the stored values; the sparsity pattern stays fixed.
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Iterates over `(col, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    /// Position of entry `(i, j)` in the value array, if stored.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_ptr[i];
        self.col_idx[start..self.row_ptr[i + 1]]
            .binary_search(&j)
            .ok()
            .map(|k| start + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |p| self.values[p])
    }

    /// `y = self * x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n_cols, x.len())?;
        let mut y = vec![0.0; self.n_rows];
        self.mul_vec_into(x, &mut y);
        Ok(y)
    }

    /// `y = self * x` without length checks beyond debug assertions.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(y.len(), self.n_rows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            *yi = acc;
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.n_cols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n_rows {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[p];
                col_idx[next[j]] = i;
                values[next[j]] = self.values[p];
                next[j] += 1;
            }
        }
        SparseMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr: counts,
            col_idx,
            values,
        }
    }

    /// Exact (bitwise value) symmetry, including the sparsity pattern.
    pub fn is_symmetric(&self) -> bool {
        self.is_square() && *self == self.transpose()
    }

    /// Returns a copy in which every diagonal entry is structurally present
    /// (inserting explicit zeros where needed).
    pub fn with_full_diagonal(&self) -> Result<SparseMatrix> {
        if !self.is_square() {
            return Err(Error::Structural("matrix is not square".into()));
        }
        if (0..self.n_rows).all(|i| self.position(i, i).is_some()) {
            return Ok(self.clone());
        }
        let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(self.nnz() + self.n_rows);
        for i in 0..self.n_rows {
            triplets.extend(self.row(i).map(|(j, v)| (i, j, v)));
            triplets.push((i, i, 0.0));
        }
        Self::from_triplets(self.n_rows, self.n_cols, &triplets)
    }

    /// Positions of the diagonal entries in the value array.
    pub fn diagonal_positions(&self) -> Vec<Option<usize>> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.position(i, i)).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.n_cols];
        for (&j, &v) in self.col_idx.iter().zip(&self.values) {
            sums[j] += v.abs();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n_rows)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, row) in dense.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        dense
    }
}

fn require_square(m: &SparseMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidArgument(format!(
            "expected a square matrix, got {}x{}",
            m.n_rows(),
            m.n_cols()
        )));
    }
    Ok(())
}

/// True iff every stored off-diagonal value is nonpositive.
pub fn validate_z_pattern(m: &SparseMatrix) -> Result<bool> {
    require_square(m)?;
    Ok((0..m.n_rows()).all(|i| m.row(i).all(|(j, v)| i == j || v <= 0.0)))
}

/// True iff the directed graph of off-diagonal nonzeros is strongly connected.
///
/// Runs a breadth-first search from node 0 over the graph and over its
/// reverse; both must reach every node.
pub fn validate_irreducible(m: &SparseMatrix) -> Result<bool> {
    require_square(m)?;
    let reaches_all = |g: &SparseMatrix| {
        let n = g.n_rows();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for (j, v) in g.row(i) {
                if j != i && v != 0.0 && !seen[j] {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == n
    };
    if !reaches_all(m) {
        return Ok(false);
    }
    Ok(m.is_symmetric() || reaches_all(&m.transpose()))
}

/// Certificate for a nonsingular M-matrix: `m` is a Z-matrix and `m * v > 0`
/// for the supplied positive `v`.
pub fn certify_m_matrix(m: &SparseMatrix, v: &[f64]) -> Result<bool> {
    require_square(m)?;
    check_len(m.n_cols(), v.len())?;
    if !validate_z_pattern(m)? {
        return Err(Error::Structural("matrix has a positive off-diagonal entry".into()));
    }
    if let Some((index, &value)) = v.iter().enumerate().find(|(_, &x)| !(x > 0.0)) {
        return Err(Error::PositivityViolation { index, value });
    }
    Ok(m.mul_vec(v)?.iter().all(|&x| x > 0.0))
}
