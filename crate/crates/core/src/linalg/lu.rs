//! Left-looking sparse LU with threshold partial pivoting, `P M Q = L U`.
//!
//! Columns are taken in a fill-reducing order `Q`; within each column the
//! diagonal entry is kept as pivot whenever it is within `DIAGONAL_PREFERENCE`
//! of the largest candidate, so M-matrices factor without row exchanges.

use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

const NONE: usize = usize::MAX;
const DIAGONAL_PREFERENCE: f64 = 0.1;

#[derive(Debug, Clone)]
pub(crate) struct LuFactor {
    col_order: Vec<usize>,
    row_pinv: Vec<usize>,
    // unit lower factor by columns, diagonal first, rows in pivot order
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    // upper factor by columns, diagonal last
    u_ptr: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
}

/// Factors `m` taking columns in `col_order`. A pivot smaller than
/// `pivot_tol * max|M(:, j)|` is reported as singular.
pub(crate) fn factorize(m: &SparseMatrix, col_order: &[usize], pivot_tol: f64) -> Result<LuFactor> {
    let n = m.n_rows();
    let cols = m.transpose();

    let mut row_pinv = vec![NONE; n];
    let mut l_ptr = vec![0usize];
    let mut l_idx = Vec::new();
    let mut l_val = Vec::new();
    let mut u_ptr = vec![0usize];
    let mut u_idx = Vec::new();
    let mut u_val = Vec::new();

    let mut x = vec![0.0; n];
    let mut mark = vec![NONE; n];
    let mut postorder = Vec::with_capacity(n);
    let mut stack: Vec<(usize, usize)> = Vec::new();

    for (k, &col) in col_order.iter().enumerate() {
        // reach of the column's pattern in the graph of L, as a postorder
        postorder.clear();
        for (start, _) in cols.row(col) {
            if mark[start] == k {
                continue;
            }
            mark[start] = k;
            stack.push((start, 0));
            while let Some(&mut (node, ref mut cursor)) = stack.last_mut() {
                let children: &[usize] = match row_pinv[node] {
                    NONE => &[],
                    j => &l_idx[l_ptr[j] + 1..l_ptr[j + 1]],
                };
                let mut pushed = None;
                while *cursor < children.len() {
                    let child = children[*cursor];
                    *cursor += 1;
                    if mark[child] != k {
                        mark[child] = k;
                        pushed = Some(child);
                        break;
                    }
                }
                match pushed {
                    Some(child) => stack.push((child, 0)),
                    None => {
                        postorder.push(node);
                        stack.pop();
                    }
                }
            }
        }

        let mut col_max = 0.0f64;
        for (i, v) in cols.row(col) {
            x[i] = v;
            col_max = col_max.max(v.abs());
        }
        for &j in postorder.iter().rev() {
            let pj = row_pinv[j];
            if pj == NONE {
                continue;
            }
            let xj = x[j];
            for p in l_ptr[pj] + 1..l_ptr[pj + 1] {
                x[l_idx[p]] -= l_val[p] * xj;
            }
        }

        let mut best = NONE;
        let mut best_abs = -1.0;
        for &i in postorder.iter().rev() {
            if row_pinv[i] == NONE {
                if x[i].abs() > best_abs {
                    best_abs = x[i].abs();
                    best = i;
                }
            } else {
                u_idx.push(row_pinv[i]);
                u_val.push(x[i]);
            }
        }
        if best == NONE || !(best_abs > pivot_tol * col_max) {
            return Err(Error::Singular { pivot: k });
        }
        if row_pinv[col] == NONE && mark[col] == k && x[col].abs() >= DIAGONAL_PREFERENCE * best_abs {
            best = col;
        }
        let pivot = x[best];
        u_idx.push(k);
        u_val.push(pivot);
        u_ptr.push(u_idx.len());

        row_pinv[best] = k;
        l_idx.push(best);
        l_val.push(1.0);
        for &i in postorder.iter().rev() {
            if row_pinv[i] == NONE {
                l_idx.push(i);
                l_val.push(x[i] / pivot);
            }
            x[i] = 0.0;
        }
        l_ptr.push(l_idx.len());
    }

    for r in &mut l_idx {
        *r = row_pinv[*r];
    }

    Ok(LuFactor { col_order: col_order.to_vec(), row_pinv, l_ptr, l_idx, l_val, u_ptr, u_idx, u_val })
}

impl LuFactor {
    pub(crate) fn nnz(&self) -> usize {
        self.l_val.len() + self.u_val.len()
    }

    pub(crate) fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.row_pinv.len();
        let mut z = vec![0.0; n];
        for (i, &k) in self.row_pinv.iter().enumerate() {
            z[k] = b[i];
        }
        for j in 0..n {
            let zj = z[j];
            for p in self.l_ptr[j] + 1..self.l_ptr[j + 1] {
                z[self.l_idx[p]] -= self.l_val[p] * zj;
            }
        }
        for j in (0..n).rev() {
            let end = self.u_ptr[j + 1] - 1;
            z[j] /= self.u_val[end];
            let zj = z[j];
            for p in self.u_ptr[j]..end {
                z[self.u_idx[p]] -= self.u_val[p] * zj;
            }
        }
        for (k, &j) in self.col_order.iter().enumerate() {
            b[j] = z[k];
        }
    }
}
