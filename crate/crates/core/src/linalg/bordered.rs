use serde::Serialize;

use super::factor::Factorization;
use super::{dot, min_entry};
use crate::error::{check_len, Error, Result};

/// Solution of the bordered Newton system
///
/// ```text
/// [ J    -u ] [ delta        ]   [ -r ]
/// [ u^T   0 ] [ delta_lambda ] = [  s ],     s = (1 - u^T u) / 2
/// ```
///
/// obtained by block elimination against a single factorization of `J`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BorderedSolution {
    pub delta: Vec<f64>,
    pub delta_lambda: f64,
    /// `J^{-1} u`
    pub p: Vec<f64>,
    /// `J^{-1} r`
    pub q: Vec<f64>,
    /// `s + u^T q`; nonnegative whenever `r >= 0` and zero exactly at an eigenpair.
    pub bordered_slack: f64,
}

/// Block elimination: `p = J^{-1} u`, `q = J^{-1} r`,
/// `delta_lambda = (s + u^T q) / u^T p`, `delta = delta_lambda p - q`.
///
/// `fact` must factor an M-matrix `J`, so `u^T p > 0` for positive `u`; a
/// nonpositive value is reported as an internal consistency failure.
pub fn solve_bordered(fact: &Factorization, u: &[f64], r: &[f64]) -> Result<BorderedSolution> {
    check_len(fact.n(), u.len())?;
    check_len(fact.n(), r.len())?;
    let p = fact.solve(u)?;
    let q = fact.solve(r)?;
    let s = 0.5 * (1.0 - dot(u, u));
    let utp = dot(u, &p);
    if !(utp > 0.0) {
        return Err(Error::InternalConsistency(format!(
            "u^T J^-1 u = {utp:e} is not positive (min p = {:e})",
            min_entry(&p)
        )));
    }
    let bordered_slack = s + dot(u, &q);
    let delta_lambda = bordered_slack / utp;
    let delta = p.iter().zip(&q).map(|(pi, qi)| delta_lambda * pi - qi).collect();
    Ok(BorderedSolution { delta, delta_lambda, p, q, bordered_slack })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{factorize, SparseMatrix};

    #[test]
    fn zero_residual_gives_zero_step() {
        let j = SparseMatrix::from_dense(&[vec![13.0 / 9.0, -1.0], vec![-1.0, 13.0 / 9.0]]).unwrap();
        let f = factorize(&j).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let sol = solve_bordered(&f, &[h, h], &[0.0, 0.0]).unwrap();
        assert_eq!(sol.q, vec![0.0, 0.0]);
        assert!(sol.delta_lambda.abs() < 1e-16);
        assert!(sol.delta.iter().all(|d| d.abs() < 1e-16));
        // J u = (4/9) u, so p = (9/4) u
        assert!((sol.p[0] - 2.25 * h).abs() < 1e-14);
    }

    #[test]
    fn satisfies_both_block_rows() {
        let j = SparseMatrix::from_dense(&[
            vec![3.0, -1.0, 0.0],
            vec![-1.0, 3.0, -1.0],
            vec![0.0, -1.0, 3.0],
        ])
        .unwrap();
        let f = factorize(&j).unwrap();
        let u = [0.5, 0.6, 0.7];
        let r = [0.1, 0.0, 0.3];
        let sol = solve_bordered(&f, &u, &r).unwrap();
        let jd = j.mul_vec(&sol.delta).unwrap();
        for i in 0..3 {
            assert!((jd[i] - sol.delta_lambda * u[i] + r[i]).abs() < 1e-14);
        }
        let s = 0.5 * (1.0 - dot(&u, &u));
        assert!((dot(&u, &sol.delta) - s).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_positive_projection() {
        let f = factorize(&SparseMatrix::from_dense(&[vec![-1.0, 0.0], vec![0.0, -1.0]]).unwrap()).unwrap();
        assert!(matches!(
            solve_bordered(&f, &[0.6, 0.8], &[0.0, 0.0]),
            Err(Error::InternalConsistency(_))
        ));
    }
}
