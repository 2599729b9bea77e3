//! Independent oracles and post-hoc checks.
//!
//! Everything here goes through dense arithmetic or finite differences so it
//! shares no code path with the sparse factorizations it is used to check.

use serde::Serialize;

use crate::error::{check_len, Error, Result};

use crate::nni::{SolveStatus, SolveTrace};
use crate::problem::NaepProblem;

pub const DENSE_ORACLE_MAX_N: usize = 512;
pub const FD_CHECK_MAX_N: usize = 200;
pub const FD_CHECK_TOL: f64 = 1e-5;
pub const FD_STEP: f64 = 1e-6;
/// Residuals at or below this are treated as rounding noise by the order estimate.
pub const ORDER_NOISE_FLOOR: f64 = 100.0 * f64::EPSILON;
/// Slack allowed on the transition into the final converged record, relative to `max(1, |lambda|)`.
pub const FINAL_LAMBDA_SLACK: f64 = 1e-12;

/// Outcome of comparing something against a reference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub max_abs_error: f64,
    pub max_rel_error: f64,
    /// Index of the worst (or first failing) entry, if any.
    pub location: Option<usize>,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

impl OracleReport {
    fn from_errors(max_abs_error: f64, max_rel_error: f64, location: Option<usize>, tolerance: f64) -> Self {
        OracleReport {
            max_abs_error,
            max_rel_error,
            location,
            tolerance,
            passed: max_rel_error <= tolerance,
            failures: Vec::new(),
        }
    }
}

/// Entrywise comparison; the relative error is normwise, `max|x - ref| / max|ref|`
/// (plain absolute error when the reference vanishes).
pub fn compare_vectors(reference: &[f64], candidate: &[f64], tolerance: f64) -> Result<OracleReport> {
    check_len(reference.len(), candidate.len())?;
    let mut max_abs = 0.0;
    let mut location = None;
    for (i, (r, c)) in reference.iter().zip(candidate).enumerate() {
        let e = (r - c).abs();
        if e > max_abs || (e.is_nan() && location.is_none()) {
            max_abs = if e.is_nan() { f64::INFINITY } else { e };
            location = Some(i);
        }
    }
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rel = if scale > 0.0 { max_abs / scale } else { max_abs };
    Ok(OracleReport::from_errors(max_abs, rel, location, tolerance))
}

/// Gaussian elimination with partial pivoting on a dense row-major copy.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    check_len(n, a.len())?;
    for row in &a {
        check_len(n, row.len())?;
    }
    for k in 0..n {
        let (piv, piv_abs) = (k..n)
            .map(|i| (i, a[i][k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(piv_abs > 0.0) {
            return Err(Error::Singular { pivot: k });
        }
        a.swap(k, piv);
        b.swap(k, piv);
        let pivot_row = a[k].clone();
        for i in k + 1..n {
            let factor = a[i][k] / pivot_row[k];
            if factor != 0.0 {
                for j in k..n {
                    a[i][j] -= factor * pivot_row[j];
                }
                b[i] -= factor * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Ok(x)
}

/// Dense `(n+1) x (n+1)` Newton system at `(u, lambda)`,
///
/// ```text
/// [  J(u)  -u ] [ delta        ]   [ -r(u, lambda)      ]
/// [ -u^T    0 ] [ delta_lambda ] = [ -(1 - u^T u) / 2   ]
/// ```
///
/// returned as `(matrix, rhs)`.
pub fn dense_bordered_system(prob: &NaepProblem, u: &[f64], lambda: f64) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let n = prob.n();
    check_len(n, u.len())?;
    let jac = prob.jacobian(u, lambda)?.matrix.to_dense();
    let r = prob.residual(u, lambda)?;
    let s = 0.5 * (1.0 - u.iter().map(|x| x * x).sum::<f64>());
    let mut m = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        m[i][..n].copy_from_slice(&jac[i]);
        m[i][n] = -u[i];
        m[n][i] = -u[i];
    }
    let mut rhs: Vec<f64> = r.iter().map(|x| -x).collect();
    rhs.push(-s);
    Ok((m, rhs))
}

/// Reference `(Delta, delta_lambda)` from a dense solve of the full bordered system.
pub fn dense_bordered_oracle(prob: &NaepProblem, u: &[f64], lambda: f64) -> Result<(Vec<f64>, f64)> {
    if prob.n() > DENSE_ORACLE_MAX_N {
        return Err(Error::InvalidArgument(format!(
            "dense oracle limited to n <= {DENSE_ORACLE_MAX_N}, got {}",
            prob.n()
        )));
    }
    let (m, rhs) = dense_bordered_system(prob, u, lambda)?;
    let mut x = dense_solve(m, rhs)?;
    let delta_lambda = x.pop().unwrap();
    Ok((x, delta_lambda))
}

/// Compares every column of `J(u)` (at fixed `lambda`) with central
/// differences of the residual, step `1e-6 (1 + |u_j|)`. The relative error of
/// a column is `max_i |fd_ij - J_ij| / max_i |J_ij|`; `location` is the worst column.
pub fn fd_jacobian_check(prob: &NaepProblem, u: &[f64], lambda: f64) -> Result<OracleReport> {
    let n = prob.n();
    if n > FD_CHECK_MAX_N {
        return Err(Error::InvalidArgument(format!(
            "finite-difference check limited to n <= {FD_CHECK_MAX_N}, got {n}"
        )));
    }
    check_len(n, u.len())?;
    let jac = prob.jacobian(u, lambda)?.matrix.to_dense();
    let mut max_abs = 0.0f64;
    let mut max_rel = 0.0f64;
    let mut location = None;
    let mut shifted = u.to_vec();
    for j in 0..n {
        let h = FD_STEP * (1.0 + u[j].abs());
        shifted[j] = u[j] + h;
        let plus = prob.residual(&shifted, lambda)?;
        shifted[j] = u[j] - h;
        let minus = prob.residual(&shifted, lambda)?;
        shifted[j] = u[j];

        let mut col_abs = 0.0f64;
        let mut col_scale = 0.0f64;
        for i in 0..n {
            let fd = (plus[i] - minus[i]) / (2.0 * h);
            col_abs = col_abs.max((fd - jac[i][j]).abs());
            col_scale = col_scale.max(jac[i][j].abs());
        }
        let col_rel = if col_scale > 0.0 { col_abs / col_scale } else { col_abs };
        max_abs = max_abs.max(col_abs);
        if col_rel > max_rel || location.is_none() {
            max_rel = max_rel.max(col_rel);
            location = Some(j);
        }
    }
    Ok(OracleReport::from_errors(max_abs, max_rel, location, FD_CHECK_TOL))
}

/// Post-hoc check of the positivity, monotonicity and boundedness properties
/// of a trace:
///
/// * `min_u > 0` on every record;
/// * `lambda <= ||A|| + (1 + n) Gamma` (with the 1/inf-norm estimate of `||A||`);
/// * `lambda` strictly increasing between records, except that the
///   transition into the final record of a converged run may stall within
///   rounding ([`FINAL_LAMBDA_SLACK`]);
/// * every step has `theta` in `(0, 1]` and `theta = 2^-halvings`.
///
/// `location` is the first failing record; `max_abs_error` the largest
/// decrease of lambda seen. Failures are reported, never raised.
pub fn validate_trace(prob: &NaepProblem, trace: &SolveTrace) -> OracleReport {
    let bound = prob.lambda_upper_bound();
    let records = &trace.records;
    let mut failures = Vec::new();
    let mut location = None;
    let mut max_decrease = 0.0f64;
    let mut fail = |idx: usize, msg: String, failures: &mut Vec<String>| {
        location.get_or_insert(idx);
        failures.push(format!("record {idx}: {msg}"));
    };

    for (idx, rec) in records.iter().enumerate() {
        if !(rec.min_u > 0.0) {
            fail(idx, format!("min_u = {:e} is not positive", rec.min_u), &mut failures);
        }
        if !(rec.lambda <= bound) {
            fail(idx, format!("lambda = {} above bound {bound}", rec.lambda), &mut failures);
        }
        match (rec.theta, rec.halvings) {
            (Some(theta), Some(halvings)) => {
                if !(theta > 0.0 && theta <= 1.0) {
                    fail(idx, format!("theta = {theta} outside (0, 1]"), &mut failures);
                }
                if theta != 0.5f64.powi(halvings as i32) {
                    fail(idx, format!("theta = {theta} but {halvings} halvings"), &mut failures);
                }
            }
            (None, None) => {}
            _ => fail(idx, "theta and halvings must be recorded together".into(), &mut failures),
        }
        if idx > 0 {
            let prev = records[idx - 1].lambda;
            max_decrease = max_decrease.max(prev - rec.lambda);
            let is_final = idx + 1 == records.len() && trace.status == SolveStatus::Converged;
            let ok = if is_final {
                rec.lambda >= prev - FINAL_LAMBDA_SLACK * 1f64.max(prev.abs())
            } else {
                rec.lambda > prev
            };
            if !ok {
                fail(idx, format!("lambda {} does not increase from {prev}", rec.lambda), &mut failures);
            }
        }
    }

    let passed = failures.is_empty();
    OracleReport {
        max_abs_error: max_decrease,
        max_rel_error: if passed { 0.0 } else { f64::INFINITY },
        location,
        tolerance: 0.0,
        passed,
        failures,
    }
}

/// Empirical convergence order, or why it cannot be estimated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum OrderEstimate {
    Order(f64),
    NotApplicable(String),
}

impl OrderEstimate {
    pub fn order(&self) -> Option<f64> {
        match self {
            OrderEstimate::Order(q) => Some(*q),
            OrderEstimate::NotApplicable(_) => None,
        }
    }
}

/// Least-squares slope of `log r_{k+1}` against `log r_k` over the last three
/// steps whose residuals are above [`ORDER_NOISE_FLOOR`]. Needs at least five
/// iterations and a strictly decreasing tail.
pub fn convergence_order_estimate(trace: &SolveTrace) -> OrderEstimate {
    let residuals: Vec<f64> = trace.records.iter().map(|r| r.rel_residual).collect();
    order_from_residuals(&residuals)
}

/// [`convergence_order_estimate`] on a bare residual sequence (one per iterate).
pub fn order_from_residuals(residuals: &[f64]) -> OrderEstimate {
    if residuals.len() < 6 {
        return OrderEstimate::NotApplicable(format!(
            "need at least 5 iterations, have {}",
            residuals.len().saturating_sub(1)
        ));
    }
    let usable: Vec<f64> = residuals.iter().copied().filter(|&r| r > ORDER_NOISE_FLOOR).collect();
    if usable.len() < 4 {
        return OrderEstimate::NotApplicable("fewer than four residuals above the noise floor".into());
    }
    let tail = &usable[usable.len() - 4..];
    if tail.windows(2).any(|w| !(w[1] < w[0])) {
        return OrderEstimate::NotApplicable("terminal residuals are not strictly decreasing".into());
    }
    let xs: Vec<f64> = tail[..3].iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = tail[1..].iter().map(|r| r.ln()).collect();
    let mean_x = xs.iter().sum::<f64>() / 3.0;
    let mean_y = ys.iter().sum::<f64>() / 3.0;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    if !(sxx > 0.0) {
        return OrderEstimate::NotApplicable("degenerate residual tail".into());
    }
    OrderEstimate::Order(sxy / sxx)
}
