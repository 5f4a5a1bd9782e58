//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};

const PIVOT_FLOOR: f64 = 1e-300;

/// Solves `A x = rhs` where `A` has sub-diagonal `lower` (length `n-1`),
/// diagonal `diag` (length `n`) and super-diagonal `upper` (length `n-1`).
///
/// Forward elimination runs without pivoting; a pivot smaller than `1e-300`
/// in magnitude is reported as [`Error::PivotBreakdown`].
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 || lower.len() + 1 != n || upper.len() + 1 != n || rhs.len() != n {
        return Err(Error::Dimension(format!(
            "tridiagonal system with lower={}, diag={}, upper={}, rhs={}",
            lower.len(),
            diag.len(),
            upper.len(),
            rhs.len()
        )));
    }

    let mut c_prime = vec![0.0; n];
    let mut x = vec![0.0; n];

    let mut pivot = diag[0];
    if !(pivot.abs() >= PIVOT_FLOOR) {
        return Err(Error::PivotBreakdown { row: 0, pivot });
    }
    if n > 1 {
        c_prime[0] = upper[0] / pivot;
    }
    x[0] = rhs[0] / pivot;

    for i in 1..n {
        pivot = diag[i] - lower[i - 1] * c_prime[i - 1];
        if !(pivot.abs() >= PIVOT_FLOOR) {
            return Err(Error::PivotBreakdown { row: i, pivot });
        }
        if i < n - 1 {
            c_prime[i] = upper[i] / pivot;
        }
        x[i] = (rhs[i] - lower[i - 1] * x[i - 1]) / pivot;
    }

    for i in (0..n - 1).rev() {
        x[i] -= c_prime[i] * x[i + 1];
    }
    Ok(x)
}
