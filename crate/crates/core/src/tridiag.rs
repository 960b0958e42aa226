//! Thomas algorithm for tridiagonal systems.
//!
//! No pivoting: callers pass systems that are either diagonally dominant
//! (the discrete Dirichlet Laplacian) or Newton Jacobians, where a vanishing
//! pivot is reported instead of silently producing garbage.

use crate::error::{Error, Result};

/// Pivots below this magnitude are treated as singular.
pub const PIVOT_FLOOR: f64 = 1e-14;

/// Solve `A x = rhs` where `A` has sub-diagonal `lower` (length n-1),
/// diagonal `diag` (length n) and super-diagonal `upper` (length n-1).
pub fn solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if rhs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: rhs.len(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if lower.len() + 1 != n || upper.len() + 1 != n {
        return Err(Error::InvalidParameter(format!(
            "off-diagonals must have length {}, got {} and {}",
            n - 1,
            lower.len(),
            upper.len()
        )));
    }

    // Forward elimination: c holds the modified super-diagonal, x the modified rhs.
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut pivot = diag[0];
    check_pivot(0, pivot)?;
    if n > 1 {
        c[0] = upper[0] / pivot;
    }
    x[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i - 1] * c[i - 1];
        check_pivot(i, pivot)?;
        if i < n - 1 {
            c[i] = upper[i] / pivot;
        }
        x[i] = (rhs[i] - lower[i - 1] * x[i - 1]) / pivot;
    }

    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

fn check_pivot(row: usize, pivot: f64) -> Result<()> {
    if !pivot.is_finite() || pivot.abs() < PIVOT_FLOOR {
        return Err(Error::SingularJacobian { row, pivot });
    }
    Ok(())
}

/// Computes `A x` for a tridiagonal `A` given by its three diagonals.
pub fn apply(lower: &[f64], diag: &[f64], upper: &[f64], x: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut acc = diag[i] * x[i];
            if i > 0 {
                acc += lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += upper[i] * x[i + 1];
            }
            acc
        })
        .collect()
}
