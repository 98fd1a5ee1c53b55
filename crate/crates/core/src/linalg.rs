//! Symmetric tridiagonal solves.

use crate::error::{Error, Result};

/// Solve `A x = rhs` for symmetric tridiagonal `A` given by its diagonal and
/// off-diagonal (`off[i] = A[i][i+1]`). Fails if a pivot is not positive,
/// which for the Hessians assembled here means `A` is not positive definite.
///
/// `offset` is added to reported node indices.
pub fn solve_spd_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64], offset: usize) -> Result<Vec<f64>> {
    let n = diag.len();
    debug_assert_eq!(rhs.len(), n);
    debug_assert_eq!(off.len() + 1, n.max(1));
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if !(pivot > 0.0) || !pivot.is_finite() {
        return Err(Error::IndefiniteJacobian { node: offset, pivot });
    }
    if n > 1 {
        c[0] = off[0] / pivot;
    }
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - off[i - 1] * c[i - 1];
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(Error::IndefiniteJacobian {
                node: offset + i,
                pivot,
            });
        }
        if i + 1 < n {
            c[i] = off[i] / pivot;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / pivot;
    }
    for i in (0..n.saturating_sub(1)).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}
