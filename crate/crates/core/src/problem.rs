//! The discrete saturable eigenproblem
//!
//! ```text
//! A u + Gamma diag(1 - 1/(a + u^2)) u = lambda u,    u^T u = 1,
//! ```
//!
//! with `A` an irreducible nonsingular M-matrix, `a > 0` and `Gamma > 0`,
//! together with the operators the Newton-Noda iteration is built from.

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::linalg::{norm2, validate_irreducible, validate_z_pattern, SparseMatrix};

/// Immutable problem instance: stencil matrix `A`, saturation vector `a`, coupling `Gamma`.
#[derive(Debug, Clone)]
pub struct NaepProblem {
    matrix: SparseMatrix,
    diag_pos: Vec<usize>,
    saturation: Vec<f64>,
    gamma: f64,
    offdiag_row_abs: Vec<f64>,
    offdiag_col_abs: Vec<f64>,
}

/// `J(u) = A + (Gamma - lambda) I - Gamma diag((a - u^2) / (a + u^2)^2)`.
#[derive(Debug, Clone)]
pub struct JacobianMatrix {
    pub matrix: SparseMatrix,
    pub lambda_used: f64,
}

/// One iterate `(u_k, lambda_k)` with its residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterateState {
    pub u: Vec<f64>,
    pub lambda: f64,
    pub r: Vec<f64>,
    pub r_norm: f64,
    pub rel_residual: f64,
    pub k: usize,
}

fn require_positive(u: &[f64]) -> Result<()> {
    match u.iter().position(|&x| !(x > 0.0)) {
        Some(index) => Err(Error::PositivityViolation { index, value: u[index] }),
        None => Ok(()),
    }
}

impl NaepProblem {
    /// Validates and builds a problem.
    ///
    /// `matrix` must be square with a Z-pattern and an irreducible (strongly
    /// connected) off-diagonal graph, every `a_i` must be positive and finite,
    /// and `gamma` must be finite and nonnegative (`gamma = 0` is the linear
    /// eigenproblem for `A`).
    pub fn new(matrix: SparseMatrix, saturation: Vec<f64>, gamma: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Structural(format!(
                "matrix must be square, got {}x{}",
                matrix.n_rows(),
                matrix.n_cols()
            )));
        }
        check_len(matrix.n_rows(), saturation.len())?;
        if let Some(i) = saturation.iter().position(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "saturation a[{i}] = {} must be positive and finite",
                saturation[i]
            )));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("gamma = {gamma} must be finite and >= 0")));
        }
        if !validate_z_pattern(&matrix)? {
            return Err(Error::Structural("matrix has a positive off-diagonal entry".into()));
        }
        if !validate_irreducible(&matrix)? {
            return Err(Error::Structural("matrix is reducible".into()));
        }

        let matrix = matrix.with_full_diagonal()?;
        let diag_pos = matrix.diagonal_positions().into_iter().map(Option::unwrap).collect();
        let n = matrix.n_rows();
        let mut offdiag_row_abs = vec![0.0; n];
        let mut offdiag_col_abs = vec![0.0; n];
        for i in 0..n {
            for (j, v) in matrix.row(i) {
                if i != j {
                    offdiag_row_abs[i] += v.abs();
                    offdiag_col_abs[j] += v.abs();
                }
            }
        }
        Ok(NaepProblem { matrix, diag_pos, saturation, gamma, offdiag_row_abs, offdiag_col_abs })
    }

    pub fn n(&self) -> usize {
        self.saturation.len()
    }

    /// `A`, with every diagonal entry structurally present.
    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn saturation(&self) -> &[f64] {
        &self.saturation
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `sqrt(||A||_1 ||A||_inf)`, an upper bound for `||A||_2`.
    pub fn matrix_norm_estimate(&self) -> f64 {
        (self.matrix.norm_one() * self.matrix.norm_inf()).sqrt()
    }

    /// Upper bound `||A|| + (1 + n) Gamma` for every lambda the iteration produces,
    /// with `||A||` replaced by [`Self::matrix_norm_estimate`].
    pub fn lambda_upper_bound(&self) -> f64 {
        self.matrix_norm_estimate() + (1.0 + self.n() as f64) * self.gamma
    }

    /// `d_i = Gamma (1 - 1 / (a_i + u_i^2))`, the diagonal of the nonlinear term.
    pub fn nonlinear_diagonal(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n(), u.len())?;
        Ok(u.iter()
            .zip(&self.saturation)
            .map(|(&ui, &ai)| self.gamma * (1.0 - 1.0 / (ai + ui * ui)))
            .collect())
    }

    /// `A(u) v = A v + diag(d(u)) v`.
    pub fn apply_operator(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n(), v.len())?;
        let d = self.nonlinear_diagonal(u)?;
        let mut y = self.matrix.mul_vec(v)?;
        for ((yi, di), vi) in y.iter_mut().zip(&d).zip(v) {
            *yi += di * vi;
        }
        Ok(y)
    }

    /// `r(u, lambda) = A(u) u - lambda u`.
    pub fn residual(&self, u: &[f64], lambda: f64) -> Result<Vec<f64>> {
        let mut r = self.apply_operator(u, u)?;
        for (ri, ui) in r.iter_mut().zip(u) {
            *ri -= lambda * ui;
        }
        Ok(r)
    }

    /// Noda lower estimate `min_i (A(u) u)_i / u_i`; requires `u > 0`.
    pub fn lambda_floor(&self, u: &[f64]) -> Result<f64> {
        check_len(self.n(), u.len())?;
        require_positive(u)?;
        let w = self.apply_operator(u, u)?;
        Ok(w.iter().zip(u).map(|(wi, ui)| wi / ui).fold(f64::INFINITY, f64::min))
    }

    /// Jacobian of `r(., lambda)` at `u`. Shares the pattern of `A`.
    pub fn jacobian(&self, u: &[f64], lambda: f64) -> Result<JacobianMatrix> {
        check_len(self.n(), u.len())?;
        let mut matrix = self.matrix.clone();
        let values = matrix.values_mut();
        for (i, &pos) in self.diag_pos.iter().enumerate() {
            let u2 = u[i] * u[i];
            let ai = self.saturation[i];
            let denom = ai + u2;
            values[pos] += self.gamma - lambda - self.gamma * (ai - u2) / (denom * denom);
        }
        Ok(JacobianMatrix { matrix, lambda_used: lambda })
    }

    /// `2 Gamma u^2 / (a + u^2)^2`, the gap between `J(u)` and `A(u) - lambda I`.
    pub fn jacobian_correction(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n(), u.len())?;
        Ok(u.iter()
            .zip(&self.saturation)
            .map(|(&ui, &ai)| {
                let denom = ai + ui * ui;
                2.0 * self.gamma * ui * ui / (denom * denom)
            })
            .collect())
    }

    /// `sqrt(||A(u)||_1 ||A(u)||_inf)`, the 2-norm estimate used in the relative residual.
    pub fn operator_norm_estimate(&self, u: &[f64]) -> Result<f64> {
        let d = self.nonlinear_diagonal(u)?;
        let values = self.matrix.values();
        let mut norm_one = 0.0f64;
        let mut norm_inf = 0.0f64;
        for (i, &pos) in self.diag_pos.iter().enumerate() {
            let diag = (values[pos] + d[i]).abs();
            norm_inf = norm_inf.max(self.offdiag_row_abs[i] + diag);
            norm_one = norm_one.max(self.offdiag_col_abs[i] + diag);
        }
        Ok((norm_one * norm_inf).sqrt())
    }

    /// Discrete energy `u^T A u + Gamma sum(u_i^2 - ln(1 + u_i^2 / a_i))`. Diagnostic only.
    pub fn discrete_energy(&self, u: &[f64]) -> Result<f64> {
        let au = self.matrix.mul_vec(u)?;
        let quadratic: f64 = au.iter().zip(u).map(|(x, y)| x * y).sum();
        let saturable: f64 = u
            .iter()
            .zip(&self.saturation)
            .map(|(&ui, &ai)| ui * ui - (ui * ui / ai).ln_1p())
            .sum();
        Ok(quadratic + self.gamma * saturable)
    }
}

impl IterateState {
    /// State at a positive vector `u` (taken as is, not normalized), with
    /// `lambda` set to the Noda floor.
    pub fn at(prob: &NaepProblem, u: Vec<f64>, k: usize) -> Result<Self> {
        let lambda = prob.lambda_floor(&u)?;
        let r = prob.residual(&u, lambda)?;
        let r_norm = norm2(&r);
        let rel_residual = r_norm / prob.operator_norm_estimate(&u)?;
        Ok(IterateState { u, lambda, r, r_norm, rel_residual, k })
    }
}

/// Tridiagonal `(-1, 2, -1)` of size `m`, optionally scaled by `1/h^2`, `h = 1/(m+1)`.
pub fn build_laplacian_1d(m: usize, scale_by_h2: bool) -> Result<SparseMatrix> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("grid size m = {m} must be at least 2")));
    }
    let s = if scale_by_h2 { ((m + 1) * (m + 1)) as f64 } else { 1.0 };
    let mut triplets = Vec::with_capacity(3 * m);
    for i in 0..m {
        if i > 0 {
            triplets.push((i, i - 1, -s));
        }
        triplets.push((i, i, 2.0 * s));
        if i + 1 < m {
            triplets.push((i, i + 1, -s));
        }
    }
    SparseMatrix::from_triplets(m, m, &triplets)
}

/// Five-point negative Laplacian on the `m x m` interior grid of the unit
/// square (Dirichlet boundary), row-major ordering `index = row * m + col`,
/// optionally scaled by `1/h^2`, `h = 1/(m+1)`.
pub fn build_laplacian_2d(m: usize, scale_by_h2: bool) -> Result<SparseMatrix> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("grid size m = {m} must be at least 2")));
    }
    let s = if scale_by_h2 { ((m + 1) * (m + 1)) as f64 } else { 1.0 };
    let n = m * m;
    let mut triplets = Vec::with_capacity(5 * n);
    for row in 0..m {
        for col in 0..m {
            let i = row * m + col;
            if row > 0 {
                triplets.push((i, i - m, -s));
            }
            if col > 0 {
                triplets.push((i, i - 1, -s));
            }
            triplets.push((i, i, 4.0 * s));
            if col + 1 < m {
                triplets.push((i, i + 1, -s));
            }
            if row + 1 < m {
                triplets.push((i, i + m, -s));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, &triplets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn two_site(gamma: f64) -> NaepProblem {
        let a = SparseMatrix::from_dense(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap();
        NaepProblem::new(a, vec![1.0, 1.0], gamma).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn nonlinear_diagonal_examples() {
        let p = two_site(1.0);
        let h = FRAC_1_SQRT_2;
        assert!(close(&p.nonlinear_diagonal(&[h, h]).unwrap(), &[1.0 / 3.0, 1.0 / 3.0], 1e-15));
        assert_eq!(p.nonlinear_diagonal(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert!(close(&p.nonlinear_diagonal(&[0.6, 0.8]).unwrap(), &[9.0 / 34.0, 16.0 / 41.0], 1e-15));
        assert!(matches!(p.nonlinear_diagonal(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn operator_and_residual_examples() {
        let p = two_site(1.0);
        let h = FRAC_1_SQRT_2;
        let y = p.apply_operator(&[h, h], &[h, h]).unwrap();
        assert!(close(&y, &[4.0 / 3.0 * h, 4.0 / 3.0 * h], 1e-15));
        assert!(close(&p.residual(&[h, h], 4.0 / 3.0).unwrap(), &[0.0, 0.0], 1e-15));

        // 1.2 - 0.8 + 0.6 * 9/34 and -0.6 + 1.6 + 0.8 * 16/41
        let expected = [0.4 + 0.6 * 9.0 / 34.0, 1.0 + 0.8 * 16.0 / 41.0];
        assert!(close(&p.apply_operator(&[0.6, 0.8], &[0.6, 0.8]).unwrap(), &expected, 1e-15));
        assert!(close(&expected, &[0.5588235, 1.3121951], 1e-7));
        assert!(close(&p.residual(&[0.6, 0.8], 0.0).unwrap(), &expected, 1e-15));

        let linear = two_site(0.0);
        assert_eq!(linear.apply_operator(&[0.3, 7.0], &[1.0, 0.0]).unwrap(), vec![2.0, -1.0]);
    }

    #[test]
    fn lambda_floor_examples() {
        let p = two_site(1.0);
        let h = FRAC_1_SQRT_2;
        assert!((p.lambda_floor(&[h, h]).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        let floor = p.lambda_floor(&[0.6, 0.8]).unwrap();
        assert!((floor - (0.4 + 0.6 * 9.0 / 34.0) / 0.6).abs() < 1e-15);
        assert!((floor - 0.93137255).abs() < 1e-8);
        let r = p.residual(&[0.6, 0.8], floor).unwrap();
        assert!(r[0].abs() < 1e-15);
        assert!((r[1] - 0.567_097_082_735_533).abs() < 1e-14);
        assert!((two_site(0.0).lambda_floor(&[h, h]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lambda_floor_rejects_nonpositive_vectors() {
        let p = two_site(1.0);
        assert_eq!(
            p.lambda_floor(&[0.5, 0.0]),
            Err(Error::PositivityViolation { index: 1, value: 0.0 })
        );
        assert!(matches!(p.lambda_floor(&[-0.5, 1.0]), Err(Error::PositivityViolation { index: 0, .. })));
    }

    #[test]
    fn jacobian_examples() {
        let p = two_site(1.0);
        let h = FRAC_1_SQRT_2;
        let j = p.jacobian(&[h, h], 4.0 / 3.0).unwrap();
        assert_eq!(j.lambda_used, 4.0 / 3.0);
        let dense = j.matrix.to_dense();
        assert!(close(&dense[0], &[13.0 / 9.0, -1.0], 1e-15));
        assert!(close(&dense[1], &[-1.0, 13.0 / 9.0], 1e-15));
        let ju = j.matrix.mul_vec(&[h, h]).unwrap();
        assert!(close(&ju, &[4.0 / 9.0 * h, 4.0 / 9.0 * h], 1e-15));

        let linear = two_site(0.0);
        let j0 = linear.jacobian(&[0.3, 0.9], 0.5).unwrap();
        assert_eq!(j0.matrix.to_dense(), vec![vec![1.5, -1.0], vec![-1.0, 1.5]]);
    }

    #[test]
    fn laplacian_stencils() {
        let l1 = build_laplacian_1d(3, false).unwrap();
        assert_eq!(l1.to_dense(), vec![vec![2.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 2.0]]);
        let l1s = build_laplacian_1d(2, true).unwrap();
        assert_eq!(l1s.to_dense(), vec![vec![18.0, -9.0], vec![-9.0, 18.0]]);
        let l2 = build_laplacian_2d(2, false).unwrap();
        assert_eq!(
            l2.to_dense(),
            vec![
                vec![4.0, -1.0, -1.0, 0.0],
                vec![-1.0, 4.0, 0.0, -1.0],
                vec![-1.0, 0.0, 4.0, -1.0],
                vec![0.0, -1.0, -1.0, 4.0],
            ]
        );
        assert!(l2.is_symmetric());
        assert!(validate_z_pattern(&l2).unwrap() && validate_irreducible(&l2).unwrap());
        assert!(validate_z_pattern(&l1).unwrap() && validate_irreducible(&l1).unwrap());
        assert_eq!(build_laplacian_2d(50, false).unwrap().n_rows(), 2500);
        assert!(build_laplacian_1d(1, false).is_err());
        assert!(build_laplacian_2d(1, true).is_err());
    }

    #[test]
    fn energy_examples() {
        let p = two_site(1.0);
        let h = FRAC_1_SQRT_2;
        assert_eq!(p.discrete_energy(&[0.0, 0.0]).unwrap(), 0.0);
        let e = p.discrete_energy(&[h, h]).unwrap();
        assert!((e - (2.0 - 2.0 * 1.5f64.ln())).abs() < 1e-15);
        assert!((e - 1.1890697).abs() < 1e-7);
        assert_eq!(two_site(0.0).discrete_energy(&[0.6, 0.8]).unwrap(), 0.72 - 0.96 + 1.28);
    }

    #[test]
    fn construction_validates_inputs() {
        let a = SparseMatrix::from_dense(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap();
        assert!(NaepProblem::new(a.clone(), vec![1.0, 0.0], 1.0).is_err());
        assert!(NaepProblem::new(a.clone(), vec![1.0, 1.0], -1.0).is_err());
        assert!(NaepProblem::new(a.clone(), vec![1.0, 1.0], f64::NAN).is_err());
        assert!(NaepProblem::new(a.clone(), vec![1.0], 1.0).is_err());
        let positive_off = SparseMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!(matches!(NaepProblem::new(positive_off, vec![1.0, 1.0], 1.0), Err(Error::Structural(_))));
        let reducible = SparseMatrix::from_dense(&[vec![2.0, 0.0], vec![0.0, 2.0]]).unwrap();
        assert!(matches!(NaepProblem::new(reducible, vec![1.0, 1.0], 1.0), Err(Error::Structural(_))));
    }

    #[test]
    fn relative_residual_denominator_for_linear_case() {
        let p = two_site(0.0);
        assert_eq!(p.operator_norm_estimate(&[0.6, 0.8]).unwrap(), 3.0);
        assert_eq!(p.matrix_norm_estimate(), 3.0);
        assert_eq!(p.lambda_upper_bound(), 3.0);
        assert_eq!(two_site(2.0).lambda_upper_bound(), 9.0);
    }
}
