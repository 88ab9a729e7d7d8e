//! Cubic splines, including piecewise splines with prescribed break points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;
use crate::scalar::Real;

/// C² cubic spline with clamped ends; end slopes come from the cubic through
/// the four end samples, so cubic data are reproduced exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicSpline<T> {
    x: Vec<T>,
    y: Vec<T>,
    /// Second derivatives at the nodes.
    m: Vec<T>,
}

/// Derivative at `x[0]` of the cubic through the first four samples.
fn end_slope<T: Real>(x: &[T], y: &[T]) -> T {
    // d/dt of the Lagrange basis at t = x0
    let x0 = x[0];
    let mut s = T::zero();
    for j in 0..4 {
        let mut w = T::zero();
        // l_j'(x0) = Σ_{k≠j} Π_{i≠j,k} (x0 - x_i) / Π_{i≠j} (x_j - x_i)
        let mut den = T::one();
        for i in 0..4 {
            if i != j {
                den *= x[j] - x[i];
            }
        }
        for k in 0..4 {
            if k == j {
                continue;
            }
            let mut num = T::one();
            for i in 0..4 {
                if i != j && i != k {
                    num *= x0 - x[i];
                }
            }
            w += num;
        }
        s += w / den * y[j];
    }
    s
}

impl<T: Real> CubicSpline<T> {
    pub fn new(x: Vec<T>, y: Vec<T>) -> Result<Self> {
        let n = x.len();
        if n < 4 || y.len() != n {
            return Err(Error::invalid("spline", "need matching x, y with at least four points"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("spline", "x must be strictly increasing"));
        }
        let d0 = end_slope(&x, &y);
        let xr: Vec<T> = x.iter().rev().copied().collect();
        let yr: Vec<T> = y.iter().rev().copied().collect();
        let dn = end_slope(&xr[..4], &yr[..4]);
        let six = T::lit(6.0);
        let h: Vec<T> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let (mut lo, mut di, mut up, mut rhs) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
        di[0] = T::two() * h[0];
        up[0] = h[0];
        rhs[0] = six * ((y[1] - y[0]) / h[0] - d0);
        for i in 1..n - 1 {
            lo[i] = h[i - 1];
            di[i] = T::two() * (h[i - 1] + h[i]);
            up[i] = h[i];
            rhs[i] = six * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
        }
        lo[n - 1] = h[n - 2];
        di[n - 1] = T::two() * h[n - 2];
        rhs[n - 1] = six * (dn - (y[n - 1] - y[n - 2]) / h[n - 2]);
        let m = solve_tridiagonal(&lo, &di, &up, &rhs)?;
        Ok(Self { x, y, m })
    }

    pub fn domain(&self) -> (T, T) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Value and first derivative; the end cubics are extended beyond the data.
    pub fn eval(&self, t: T) -> (T, T) {
        let n = self.x.len();
        let i = match self.x.binary_search_by(|v| v.partial_cmp(&t).expect("finite")) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let six = T::lit(6.0);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let v = a * self.y[i] + b * self.y[i + 1] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / six;
        let dv = (self.y[i + 1] - self.y[i]) / h + ((-T::lit(3.0) * a * a + T::one()) * m0 + (T::lit(3.0) * b * b - T::one()) * m1) * h / six;
        (v, dv)
    }
}

/// Side from which a break point is approached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Independent cubic splines on consecutive cells `[b_k, b_{k+1}]`.
///
/// Samples lying exactly on a break point listed in `jumps` are dropped, and
/// the one-sided values there come from the neighbouring cells' end cubics.
/// Outside `[b_0, b_last]` the spline is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseSpline<T> {
    breaks: Vec<T>,
    jumps: Vec<T>,
    cells: Vec<CubicSpline<T>>,
}

impl<T: Real> PiecewiseSpline<T> {
    pub fn new(x: &[T], y: &[T], breaks: &[T], jumps: &[T]) -> Result<Self> {
        if x.len() != y.len() || breaks.len() < 2 {
            return Err(Error::invalid("spline", "need matching samples and at least two break points"));
        }
        for b in breaks {
            if !x.contains(b) {
                return Err(Error::invalid("spline", format!("break point {b} is not a sample point")));
            }
        }
        let cells = breaks
            .windows(2)
            .map(|w| {
                let (xs, ys): (Vec<T>, Vec<T>) = x
                    .iter()
                    .zip(y)
                    .filter(|(xi, _)| **xi >= w[0] && **xi <= w[1] && !jumps.contains(xi))
                    .map(|(a, b)| (*a, *b))
                    .unzip();
                CubicSpline::new(xs, ys)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { breaks: breaks.to_vec(), jumps: jumps.to_vec(), cells })
    }

    fn cell_of(&self, t: T, side: Side) -> Option<usize> {
        let last = self.breaks.len() - 1;
        if t < self.breaks[0] || t > self.breaks[last] {
            return None;
        }
        let k = self.breaks.windows(2).position(|w| match side {
            Side::Right => t >= w[0] && t < w[1],
            Side::Left => t > w[0] && t <= w[1],
        });
        k
    }

    /// One-sided value and derivative (zero outside the break range).
    pub fn eval_side(&self, t: T, side: Side) -> (T, T) {
        match self.cell_of(t, side) {
            Some(k) => self.cells[k].eval(t),
            None => (T::zero(), T::zero()),
        }
    }

    /// Value and derivative; the mean of both sides at a jump point.
    pub fn eval(&self, t: T) -> (T, T) {
        if self.jumps.contains(&t) {
            let (a, da) = self.eval_side(t, Side::Left);
            let (b, db) = self.eval_side(t, Side::Right);
            return ((a + b) * T::half(), (da + db) * T::half());
        }
        self.eval_side(t, Side::Right)
    }
}
