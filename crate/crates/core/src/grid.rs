//! Uniform grids and kernel discretisation.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::trapezoid_weights;
use crate::scalar::{Cx, Real};

/// Uniform grid of `n` points on `[a, b]`, `x_j = (a (n-1-j) + b j) / (n-1)`.
///
/// Nodes are formed from the end points directly, so integers inside a grid
/// with integer ends and integer cells per unit are hit exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid<T> {
    pub a: T,
    pub b: T,
    pub h: T,
    pub n: usize,
}

impl<T: Real> UniformGrid<T> {
    /// `n` points spanning `[a, b]` inclusive.
    pub fn new(a: T, b: T, n: usize) -> Result<Self> {
        if n < 3 || !(b > a) {
            return Err(Error::invalid("grid", format!("need n >= 3 and b > a, got n={n}, [{a}, {b}]")));
        }
        Ok(Self { a, b, h: (b - a) / T::from_usize_lossy(n - 1), n })
    }

    /// Symmetric grid on `[-half_width, half_width]` with `per_unit` cells per
    /// unit length, so that every integer (in particular `0, ±1`) is a node.
    pub fn symmetric(half_width: usize, per_unit: usize) -> Result<Self> {
        if half_width == 0 || per_unit == 0 {
            return Err(Error::invalid("grid", "half width and resolution must be positive"));
        }
        let cells = 2 * half_width * per_unit;
        let hw = T::from_usize_lossy(half_width);
        Self::new(-hw, hw, cells + 1)
    }

    #[inline]
    pub fn x(&self, j: usize) -> T {
        let m = self.n - 1;
        (self.a * T::from_usize_lossy(m - j) + self.b * T::from_usize_lossy(j)) / T::from_usize_lossy(m)
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    pub fn trapezoid(&self) -> Vec<T> {
        trapezoid_weights(self.n, self.h)
    }

    /// Trapezoid integral of samples.
    pub fn integrate_cx(&self, f: &[Cx<T>]) -> Cx<T> {
        self.trapezoid()
            .iter()
            .zip(f)
            .fold(Cx::new(T::zero(), T::zero()), |acc, (w, v)| acc + *v * *w)
    }

    pub fn integrate(&self, f: &[T]) -> T {
        self.trapezoid().iter().zip(f).map(|(w, v)| *w * *v).sum()
    }

    /// Samples `f` at the nodes.
    pub fn sample<F: Fn(T) -> Cx<T>>(&self, f: F) -> Vec<Cx<T>> {
        (0..self.n).map(|j| f(self.x(j))).collect()
    }

    /// `(Kψ)(x_i) = Σ_j w_j K(x_i, x_j) ψ(x_j)` with trapezoid weights.
    pub fn apply_kernel<K>(&self, kernel: K, psi: &[Cx<T>]) -> Vec<Cx<T>>
    where
        K: Fn(T, T) -> Cx<T> + Sync,
    {
        assert_eq!(psi.len(), self.n);
        let w = self.trapezoid();
        let pts = self.points();
        pts.par_iter()
            .map(|&xi| {
                pts.iter()
                    .zip(&w)
                    .zip(psi)
                    .fold(Cx::new(T::zero(), T::zero()), |acc, ((&yj, &wj), &p)| acc + kernel(xi, yj) * p * wj)
            })
            .collect()
    }

    /// Matrix `h K(x_i, x_j)`, the discretisation of an integral operator on
    /// the uniform (rectangle-rule) inner product. Hermitian kernels give
    /// Hermitian matrices.
    pub fn kernel_matrix<K>(&self, kernel: K) -> Array2<Cx<T>>
    where
        K: Fn(T, T) -> Cx<T> + Sync,
    {
        let pts = self.points();
        let rows: Vec<Vec<Cx<T>>> = pts
            .par_iter()
            .map(|&xi| pts.iter().map(|&yj| kernel(xi, yj) * self.h).collect())
            .collect();
        Array2::from_shape_fn((self.n, self.n), |(i, j)| rows[i][j])
    }

    /// Central-difference momentum `-i d/dx` with Dirichlet ends.
    pub fn momentum_matrix(&self) -> Array2<Cx<T>> {
        let c = Cx::new(T::zero(), -T::one() / (T::two() * self.h));
        Array2::from_shape_fn((self.n, self.n), |(i, j)| {
            if j == i + 1 {
                c
            } else if i == j + 1 {
                -c
            } else {
                Cx::new(T::zero(), T::zero())
            }
        })
    }

    /// Diagonal matrix of `f(x_i)`.
    pub fn diagonal_matrix<F: Fn(T) -> Cx<T>>(&self, f: F) -> Array2<Cx<T>> {
        let mut m = Array2::from_elem((self.n, self.n), Cx::new(T::zero(), T::zero()));
        for i in 0..self.n {
            m[[i, i]] = f(self.x(i));
        }
        m
    }
}

/// Identity matrix over complex scalars.
pub fn identity<T: Real>(n: usize) -> Array2<Cx<T>> {
    Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            Cx::new(T::one(), T::zero())
        } else {
            Cx::new(T::zero(), T::zero())
        }
    })
}

/// Conjugate transpose.
pub fn adjoint<T: Real>(m: &Array2<Cx<T>>) -> Array2<Cx<T>> {
    m.t().mapv(|v| v.conj())
}

/// Frobenius norm.
pub fn frobenius<T: Real>(m: &Array2<Cx<T>>) -> T {
    m.iter().map(|v| v.norm_sqr()).sum::<T>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_grid_hits_breakpoints() {
        let g = UniformGrid::<f64>::symmetric(3, 10).unwrap();
        assert_eq!(g.n, 61);
        let pts = g.points();
        for target in [-1.0, 0.0, 1.0] {
            assert!(pts.contains(&target));
        }
    }

    #[test]
    fn apply_kernel_integrates() {
        let g = UniformGrid::<f64>::new(0.0, 1.0, 101).unwrap();
        let one = vec![Cx::new(1.0, 0.0); g.n];
        let out = g.apply_kernel(|x, y| Cx::new(x * y, 0.0), &one);
        // ∫ x y dy = x / 2 (exact for trapezoid on a linear integrand)
        assert!((out[50] - Cx::new(0.25, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn momentum_matrix_is_hermitian() {
        let g = UniformGrid::<f64>::new(-1.0, 1.0, 9).unwrap();
        let p = g.momentum_matrix();
        assert!(frobenius(&(&p - &adjoint(&p))) < 1e-15);
    }

    #[test]
    fn rejects_degenerate_grid() {
        assert!(UniformGrid::<f64>::new(1.0, 1.0, 10).is_err());
        assert!(UniformGrid::<f64>::new(0.0, 1.0, 2).is_err());
    }
}
