//! Quadrature and extrapolation helpers.

use num_traits::Zero;
use std::ops::{Add, Mul, Sub};

use crate::scalar::Real;

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Builds an `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            // Chebyshev-like initial guess, refined in f64 then narrowed.
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0_f64, 0.0_f64);
                for j in 0..n {
                    let p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j as f64 + 1.0) * z * p1 - j as f64 * p2) / (j as f64 + 1.0);
                }
                dp = nf * (z * p0 - p1) / (z * z - 1.0);
                let dz = p0 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = T::lit(-z);
            nodes[n - 1 - i] = T::lit(z);
            weights[i] = T::lit(w);
            weights[n - 1 - i] = T::lit(w);
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<V, F>(&self, a: T, b: T, mut f: F) -> V
    where
        V: Zero + Add<Output = V> + Mul<T, Output = V>,
        F: FnMut(T) -> V,
    {
        let half = (b - a) * T::half();
        let mid = (a + b) * T::half();
        let mut acc = V::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x) * (w * half);
        }
        acc
    }

    /// Composite rule over `[a, b]` split into `panels` equal panels.
    pub fn integrate_composite<V, F>(&self, a: T, b: T, panels: usize, mut f: F) -> V
    where
        V: Zero + Add<Output = V> + Mul<T, Output = V>,
        F: FnMut(T) -> V,
    {
        let width = (b - a) / T::from_usize_lossy(panels);
        let mut acc = V::zero();
        for k in 0..panels {
            let lo = a + width * T::from_usize_lossy(k);
            acc = acc + self.integrate(lo, lo + width, &mut f);
        }
        acc
    }
}

/// Polynomial extrapolation to `h = 0` of samples `(h_i, v_i)` (Neville).
///
/// With `m` samples this removes the `h, h², …, h^(m-1)` error terms.
pub fn extrapolate_to_zero<T, V>(h: &[T], v: &[V]) -> V
where
    T: Real,
    V: Copy + Add<Output = V> + Sub<Output = V> + Mul<T, Output = V>,
{
    assert_eq!(h.len(), v.len());
    assert!(!h.is_empty());
    let mut table: Vec<V> = v.to_vec();
    let m = h.len();
    for level in 1..m {
        for i in 0..m - level {
            let (hi, hj) = (h[i], h[i + level]);
            // P(0) = (hj * P_i - hi * P_{i+1}) / (hj - hi) written without division of V.
            let inv = T::one() / (hj - hi);
            table[i] = table[i] * (hj * inv) - table[i + 1] * (hi * inv);
        }
    }
    table[0]
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope<T: Real>(x: &[T], y: &[T]) -> T {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2);
    let n = T::from_usize_lossy(x.len());
    let lx: Vec<T> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<T> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().copied().sum::<T>() / n;
    let my = ly.iter().copied().sum::<T>() / n;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (a, b) in lx.iter().zip(&ly) {
        sxy += (*a - mx) * (*b - my);
        sxx += (*a - mx) * (*a - mx);
    }
    sxy / sxx
}

/// Trapezoid weights for a uniform grid of `n` points with spacing `h`.
pub fn trapezoid_weights<T: Real>(n: usize, h: T) -> Vec<T> {
    let mut w = vec![h; n];
    if n > 0 {
        w[0] = h * T::half();
        w[n - 1] = h * T::half();
    }
    w
}
