//! Tridiagonal and conjugate-gradient solvers for the shifted Laplacians.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("zero pivot at row {0}")]
    ZeroPivot(usize),
    #[error("conjugate gradients did not converge in {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("non-finite value in solve")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `‖Ax − b‖₂ / ‖b‖₂` from the iteration, or the normwise backward
    /// error once a grid solve has finished.
    pub residual: f64,
}

/// `‖Ax − b‖₂ / (‖A‖ ‖x‖₂ + ‖b‖₂)`.
pub fn backward_error(ax: &[f64], b: &[f64], x: &[f64], a_norm: f64) -> f64 {
    let r2: f64 = ax.iter().zip(b).map(|(a, b)| (a - b) * (a - b)).sum();
    let x2: f64 = x.iter().map(|v| v * v).sum();
    let b2: f64 = b.iter().map(|v| v * v).sum();
    let scale = a_norm * x2.sqrt() + b2.sqrt();
    if scale > 0.0 {
        r2.sqrt() / scale
    } else {
        0.0
    }
}

/// Thomas algorithm for `lower[i-1] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
///
/// For an M-matrix with nonnegative right-hand side every intermediate
/// quantity stays nonnegative, so the result is nonnegative in floating
/// point as well.
pub fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>, SolverError> {
    let n = diag.len();
    if n == 0 || lower.len() + 1 != n || upper.len() + 1 != n || rhs.len() != n {
        return Err(SolverError::Dimension(format!(
            "diag {n}, lower {}, upper {}, rhs {}",
            lower.len(),
            upper.len(),
            rhs.len()
        )));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 {
        return Err(SolverError::ZeroPivot(0));
    }
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        c[i - 1] = upper[i - 1] / pivot;
        pivot = diag[i] - lower[i - 1] * c[i - 1];
        if pivot == 0.0 {
            return Err(SolverError::ZeroPivot(i));
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / pivot;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite);
    }
    Ok(x)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// definite operator, stopping at `‖r‖ ≤ tol‖b‖`.
pub fn pcg<F>(
    apply: F,
    diag: &[f64],
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<LinearSolution, SolverError>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    if diag.len() != n {
        return Err(SolverError::Dimension(format!("diag {} vs rhs {n}", diag.len())));
    }
    let b_norm = dot(b, b).sqrt();
    let mut x: Vec<f64> = b.iter().zip(diag).map(|(b, d)| b / d).collect();
    if b_norm == 0.0 {
        return Ok(LinearSolution { x: vec![0.0; n], iterations: 0, residual: 0.0 });
    }
    let ax = apply(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let target = tol * b_norm;
    for it in 0..max_iter {
        let r_norm = dot(&r, &r).sqrt();
        if !r_norm.is_finite() {
            return Err(SolverError::NonFinite);
        }
        if r_norm <= target {
            return Ok(LinearSolution { x, iterations: it, residual: r_norm / b_norm });
        }
        let ap = apply(&p);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let residual = dot(&r, &r).sqrt() / b_norm;
    if residual <= tol {
        return Ok(LinearSolution { x, iterations: max_iter, residual });
    }
    Err(SolverError::NotConverged { iterations: max_iter, residual })
}
