//! Tridiagonal solves (real or complex).

use std::ops::{Div, Mul, Sub};

use crate::error::{Error, Result};

/// Solves `lower[i] u[i-1] + diag[i] u[i] + upper[i] u[i+1] = rhs[i]` by the
/// Thomas algorithm. `lower[0]` and `upper[n-1]` are ignored.
///
/// No pivoting: intended for diagonally dominant systems. A zero pivot is
/// reported as an error.
pub fn solve_tridiagonal<V>(lower: &[V], diag: &[V], upper: &[V], rhs: &[V]) -> Result<Vec<V>>
where
    V: Copy + PartialEq + Sub<Output = V> + Mul<Output = V> + Div<Output = V> + num_traits::Zero,
{
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n || n == 0 {
        return Err(Error::LinearSolve(format!("inconsistent tridiagonal sizes (n = {n})")));
    }
    let mut c = vec![V::zero(); n];
    let mut d = vec![V::zero(); n];
    let mut pivot = diag[0];
    if pivot == V::zero() {
        return Err(Error::LinearSolve("zero pivot in row 0".into()));
    }
    c[0] = upper[0] / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * c[i - 1];
        if pivot == V::zero() {
            return Err(Error::LinearSolve(format!("zero pivot in row {i}")));
        }
        c[i] = upper[i] / pivot;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] = d[i] - c[i] * d[i + 1];
    }
    Ok(d)
}
