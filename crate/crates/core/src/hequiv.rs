//! Equivalent Hermitian Hamiltonian `h = ρHρ⁻¹ = p² + h₂Z² + O(Z³)`.
//!
//! The first-order term vanishes because `[p², Q₁] = -2iν`. The second-order
//! kernel is `⟨x|h₂|y⟩ = ¼ g(x+y) sign(x-y) (ν(x) - ν(y))`, real, symmetric
//! and zero when both points lie outside `[-1, 1]`.
//!
//! The pseudo-differential coefficients `ωₙ(x)` are the Taylor coefficients in
//! `p` of `∫⟨x|h₂|y⟩ e^{ipy} dy` after removing the `1/p` pole produced by the
//! constant tails `K(x, y→±∞) = ±c(x)`, `c = -ν(x)/8`.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::metric::{eta1_kernel, g_profile, q1_kernel};
use crate::params::{nu, PhysicalParams};
use crate::scalar::{cx, i_unit, re, Cx, Real};
use crate::spline::{PiecewiseSpline, Side};

/// `⟨x|h₂|y⟩`.
#[inline]
pub fn h2_kernel<T: Real>(x: T, y: T) -> T {
    T::lit(0.25) * g_profile(x + y) * (x - y).sign0() * (nu(x) - nu(y))
}

/// `(i/4)⟨x|[η₊₁, ν]|y⟩ = (i/4) η₊₁(x,y) (ν(y) - ν(x))`.
#[inline]
pub fn h2_commutator_form<T: Real>(x: T, y: T) -> Cx<T> {
    cx(T::zero(), T::lit(0.25)) * eta1_kernel(x, y) * (nu(y) - nu(x))
}

/// Matrix of `(i/4)[η₊₁, ν]` built from the discretised factors.
pub fn h2_commutator_matrix<T: Real>(grid: &UniformGrid<T>) -> Array2<Cx<T>> {
    let e = grid.kernel_matrix(eta1_kernel);
    let n = grid.diagonal_matrix(|x| re(nu(x)));
    (e.dot(&n) - n.dot(&e)).mapv(|v| v * cx(T::zero(), T::lit(0.25)))
}

// ---------------------------------------------------------------------------
// Weak-form identities

/// Smooth test function with an analytic second derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TestFunction<T> {
    /// `e^{ip₀x} e^{-(x-x₀)²/(2σ²)}`
    Gaussian { x0: T, p0: T, sigma: T },
    /// `(1 - u²)⁴` for `|u| < 1`, `u = (x - center)/half_width`; zero outside.
    Bump { center: T, half_width: T },
}

impl<T: Real> TestFunction<T> {
    pub fn value(&self, x: T) -> Cx<T> {
        match *self {
            TestFunction::Gaussian { x0, p0, sigma } => {
                let u = (x - x0) / sigma;
                (i_unit::<T>() * p0 * x).exp() * (-T::half() * u * u).exp()
            }
            TestFunction::Bump { center, half_width } => {
                let u = (x - center) / half_width;
                if u.abs() >= T::one() {
                    re(T::zero())
                } else {
                    re((T::one() - u * u).powi(4))
                }
            }
        }
    }

    pub fn second_derivative(&self, x: T) -> Cx<T> {
        match *self {
            TestFunction::Gaussian { x0, p0, sigma } => {
                // f = e^{ip₀x} G, G'/G = -u/σ, G''/G = (u² - 1)/σ²
                let u = (x - x0) / sigma;
                let i = i_unit::<T>();
                let d1 = re(-u / sigma);
                let d2 = re((u * u - T::one()) / (sigma * sigma));
                let k = i * p0;
                (d2 + k * d1 * T::two() + k * k) * self.value(x)
            }
            TestFunction::Bump { center, half_width } => {
                let u = (x - center) / half_width;
                if u.abs() >= T::one() {
                    return re(T::zero());
                }
                // d²/du² (1-u²)⁴ = -8(1-u²)³ + 48u²(1-u²)²
                let w = T::one() - u * u;
                re((T::lit(48.0) * u * u * w * w - T::lit(8.0) * w * w * w) / (half_width * half_width))
            }
        }
    }
}

/// One weak-form evaluation of `⟨f|[p², Q₁]|g⟩` against `-2i⟨f|ν|g⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakPair<T> {
    pub lhs: Cx<T>,
    pub rhs: Cx<T>,
    /// `|lhs - rhs| / (‖f‖‖g‖)`
    pub residual: T,
    /// `|⟨f|iν + ½[p², Q₁]|g⟩| / (‖f‖‖g‖)`, the weak form of `h₁`.
    pub h1_residual: T,
}

/// Weak form of `[p², Q₁] = -2iν` for one pair of test functions:
/// `∫∫ [conj(-f″(x)) Q₁(x,y) g(y) - conj(f(x)) Q₁(x,y) (-g″(y))] dx dy`.
///
/// Trapezoid quadrature on `grid`; with nodes on `0, ±1`, `sign(0) = 0` on the
/// diagonal and the midpoint values of ν the rule is second order.
pub fn weak_commutator<T: Real>(f: &TestFunction<T>, g: &TestFunction<T>, grid: &UniformGrid<T>) -> WeakPair<T> {
    let pts = grid.points();
    let w = grid.trapezoid();
    let fv: Vec<Cx<T>> = pts.iter().map(|&x| f.value(x)).collect();
    let f2: Vec<Cx<T>> = pts.iter().map(|&x| -f.second_derivative(x)).collect();
    let gv: Vec<Cx<T>> = pts.iter().map(|&x| g.value(x)).collect();
    let g2: Vec<Cx<T>> = pts.iter().map(|&x| -g.second_derivative(x)).collect();
    let zero = re(T::zero());
    let lhs = (0..grid.n)
        .into_par_iter()
        .map(|i| {
            let (a, b) = (f2[i].conj(), fv[i].conj());
            if a == zero && b == zero {
                return zero;
            }
            let row = (0..grid.n).fold(zero, |acc, j| {
                let q = q1_kernel(pts[i], pts[j]);
                acc + q * (a * gv[j] - b * g2[j]) * w[j]
            });
            row * w[i]
        })
        .reduce(|| zero, |x, y| x + y);
    let nu_fg = (0..grid.n).fold(zero, |acc, i| acc + fv[i].conj() * gv[i] * (nu(pts[i]) * w[i]));
    let rhs = cx(T::zero(), -T::two()) * nu_fg;
    let norm = |v: &[Cx<T>]| v.iter().zip(&w).map(|(c, wi)| c.norm_sqr() * *wi).sum::<T>().sqrt();
    let scale = norm(&fv) * norm(&gv);
    let h1 = i_unit::<T>() * nu_fg + lhs * T::half();
    WeakPair {
        lhs,
        rhs,
        residual: (lhs - rhs).norm() / scale,
        h1_residual: h1.norm() / scale,
    }
}

/// Refinement study of the weak identities over a battery of test pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakIdentityReport<T> {
    pub cells_per_unit: Vec<usize>,
    /// Max residual over the battery at each resolution.
    pub commutator: Vec<T>,
    pub h1: Vec<T>,
    /// Log-log slope of the commutator residual against the step.
    pub slope: T,
}

/// Gaussians centred near the step plus a bump supported in `(2, 4)`; all
/// pairs are used. Widths keep the tails below `1e-8` at `|x| = 5`.
pub fn default_weak_battery<T: Real>() -> Vec<(TestFunction<T>, TestFunction<T>)> {
    let g = |x0: f64, p0: f64, s: f64| TestFunction::Gaussian { x0: T::lit(x0), p0: T::lit(p0), sigma: T::lit(s) };
    let fs = [
        g(0.0, 0.0, 0.5),
        g(0.7, 1.0, 0.6),
        g(-1.2, -0.5, 0.6),
        g(1.5, 0.0, 0.4),
        g(-0.3, 2.0, 0.5),
        TestFunction::Bump { center: T::lit(3.0), half_width: T::one() },
    ];
    let mut out = Vec::with_capacity(fs.len() * fs.len());
    for a in &fs {
        for b in &fs {
            out.push((*a, *b));
        }
    }
    out
}

/// Evaluates [`weak_commutator`] over `pairs` on symmetric grids of half
/// width `half_width` and the listed resolutions.
pub fn weak_identity_study<T: Real>(
    pairs: &[(TestFunction<T>, TestFunction<T>)],
    half_width: usize,
    cells_per_unit: &[usize],
) -> Result<WeakIdentityReport<T>> {
    if cells_per_unit.len() < 2 {
        return Err(Error::invalid("cells_per_unit", "need at least two resolutions"));
    }
    let mut commutator = Vec::new();
    let mut h1 = Vec::new();
    let mut steps = Vec::new();
    for &c in cells_per_unit {
        let grid = UniformGrid::symmetric(half_width, c)?;
        let mut worst = T::zero();
        let mut worst_h1 = T::zero();
        for (f, g) in pairs {
            let r = weak_commutator(f, g, &grid);
            worst = worst.max(r.residual);
            worst_h1 = worst_h1.max(r.h1_residual);
        }
        commutator.push(worst);
        h1.push(worst_h1);
        steps.push(grid.h);
    }
    let slope = crate::quadrature::loglog_slope(&steps, &commutator);
    Ok(WeakIdentityReport { cells_per_unit: cells_per_unit.to_vec(), commutator, h1, slope })
}

// ---------------------------------------------------------------------------
// Transform engine

/// Expansion point of the Taylor series in `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Expansion {
    /// Coefficients of `∫K(x,y) e^{ipy} dy` (moments about `y = 0`).
    #[default]
    Origin,
    /// Coefficients of `e^{-ipx}∫K(x,y) e^{ipy} dy` (moments about `y = x`).
    Centered,
}

impl Expansion {
    fn center<T: Real>(self, x: T) -> T {
        match self {
            Expansion::Origin => T::zero(),
            Expansion::Centered => x,
        }
    }
}

/// Tail constant `c(x) = K(x, y→+∞) = -ν(x)/8`.
#[inline]
pub fn tail_constant<T: Real>(x: T) -> T {
    -nu(x) / T::lit(8.0)
}

/// Linear pieces `(a, b, α, β)` of `K(x,y) - c sign(y - s₀)` in `y`; the
/// reduced kernel vanishes outside the returned cells.
fn reduced_cells<T: Real>(x: T, s0: T) -> Vec<(T, T, T, T)> {
    let two = T::two();
    let mut bps = vec![-T::one(), T::zero(), T::one(), x, -x - two, -x, -x + two, s0];
    bps.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    bps.dedup();
    let c = tail_constant(x);
    let kr = |y: T| h2_kernel(x, y) - c * (y - s0).sign0();
    let third = T::one() / T::lit(3.0);
    bps.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let y1 = a + (b - a) * third;
            let y2 = b - (b - a) * third;
            let (f1, f2) = (kr(y1), kr(y2));
            let beta = (f2 - f1) / (y2 - y1);
            (a, b, f1 - beta * y1, beta)
        })
        .collect()
}

/// Coefficients `ω₀..ω_{n_max}` at `x` together with the removed pole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSet<T> {
    pub x: T,
    pub omega: Vec<Cx<T>>,
    /// Coefficient of `1/p` removed before expansion, `2ic(x)`.
    pub pole_residue: Cx<T>,
}

/// `ωₙ(x) = iⁿ/n! ∫ (K(x,y) - c sign(y-s₀)) (y-s₀)ⁿ dy`, exact on the linear cells.
pub fn omega_at<T: Real>(x: T, n_max: usize, expansion: Expansion) -> MomentSet<T> {
    let s0 = expansion.center(x);
    let cells = reduced_cells(x, s0);
    let mut omega = Vec::with_capacity(n_max + 1);
    let mut ipow = re(T::one());
    let mut fact = T::one();
    for n in 0..=n_max {
        if n > 0 {
            ipow = ipow * i_unit::<T>();
            fact *= T::from_usize_lossy(n);
        }
        let n1 = T::from_usize_lossy(n + 1);
        let n2 = T::from_usize_lossy(n + 2);
        let mut m = T::zero();
        for &(a, b, alpha, beta) in &cells {
            let (ua, ub) = (a - s0, b - s0);
            let al = alpha + beta * s0;
            let pa = ua.powi(n as i32 + 1);
            let pb = ub.powi(n as i32 + 1);
            m += al * (pb - pa) / n1 + beta * (pb * ub - pa * ua) / n2;
        }
        omega.push(ipow * (m / fact));
    }
    MomentSet { x, omega, pole_residue: cx(T::zero(), T::two() * tail_constant(x)) }
}

/// `∫ K_reduced(x,y) e^{ip(y-s₀)} dy` in closed form (entire in `p`).
fn reduced_transform<T: Real>(x: T, p: Cx<T>, expansion: Expansion) -> Cx<T> {
    let s0 = expansion.center(x);
    if p.norm() < T::lit(1e-3) {
        // short Taylor series from the exact moments
        let m = omega_at(x, 12, expansion);
        let mut acc = re(T::zero());
        let mut pk = re(T::one());
        for w in &m.omega {
            acc = acc + *w * pk;
            pk = pk * p;
        }
        return acc;
    }
    let i = i_unit::<T>();
    let ip = i * p;
    let mut acc = re(T::zero());
    for (a, b, alpha, beta) in reduced_cells(x, s0) {
        // ∫(α+βy)e^{ip(y-s₀)} = [((α+βy)/(ip) + β/p²) e^{ip(y-s₀)}]_a^b
        let prim = |y: T| (re(alpha + beta * y) / ip + re(beta) / (p * p)) * (ip * (y - s0)).exp();
        acc = acc + prim(b) - prim(a);
    }
    acc
}

/// `⟨x|h₂|p⟩` with its pole bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumRepr<T> {
    /// `(2π)^{-1/2} ∫K(x,y) e^{ipy} e^{-ε|y|} dy` (tail part damped by `ε`).
    pub value: Cx<T>,
    /// Same without the tail contribution: finite as `p → 0`.
    pub regular: Cx<T>,
    /// `(2π)^{-1/2}·2ic(x)`: the `1/p` coefficient of the undamped tail.
    pub pole_residue: Cx<T>,
}

/// `(2π)^{-1/2}∫⟨x|h₂|y⟩e^{ipy}dy` for real `p`. The constant tails
/// `c sign(y)` are transformed with damping `e^{-ε|y|}` to `2icp/(ε² + p²)`;
/// at `ε = 0` that is the pole `2ic/p`, reported separately.
pub fn h2_momentum_repr<T: Real>(x: T, p: T, eps: T) -> MomentumRepr<T> {
    let norm = T::one() / (T::two() * T::PI()).sqrt();
    let c = tail_constant(x);
    let regular = reduced_transform(x, re(p), Expansion::Origin) * norm;
    let tail = if p == T::zero() {
        T::zero()
    } else {
        T::two() * c * p / (eps * eps + p * p)
    };
    MomentumRepr {
        value: regular + cx(T::zero(), tail * norm),
        regular,
        pole_residue: cx(T::zero(), T::two() * c * norm),
    }
}

/// Taylor coefficients of the reduced transform by the trapezoid rule on the
/// circle `|p| = radius`, independent of the moment formulas.
pub fn omega_contour<T: Real>(x: T, n_max: usize, expansion: Expansion, radius: T, points: usize) -> Vec<Cx<T>> {
    let vals: Vec<(Cx<T>, Cx<T>)> = (0..points)
        .map(|j| {
            let t = T::two() * T::PI() * T::from_usize_lossy(j) / T::from_usize_lossy(points);
            let p = Cx::from_polar(radius, t);
            (p, reduced_transform(x, p, expansion))
        })
        .collect();
    (0..=n_max)
        .map(|n| {
            let s = vals
                .iter()
                .fold(re(T::zero()), |acc, (p, f)| acc + *f / p.powi(n as i32));
            s / T::from_usize_lossy(points)
        })
        .collect()
}

/// Points where some `ωₙ` is not smooth: jumps at `0, ±1` (from ν), kinks at `±2, ±3`.
pub fn singular_points<T: Real>() -> [T; 7] {
    [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0].map(T::lit)
}

/// `dωₙ/dx` from the closed form. Central differences away from
/// [`singular_points`]; one-sided stencils next to them; at a singular
/// point itself the mean of the two one-sided limits.
pub fn omega_derivative<T: Real>(x: T, n: usize, expansion: Expansion) -> Cx<T> {
    let h = T::fd_step();
    let f = |y: T| omega_at(y, n, expansion).omega[n];
    // derivative at x⁻ / x⁺ from samples strictly on one side
    let left = |x: T| (f(x - h) * T::lit(2.5) - f(x - h * T::two()) * T::lit(4.0) + f(x - h * T::lit(3.0)) * T::lit(1.5)) / h;
    let right = |x: T| -(f(x + h) * T::lit(2.5) - f(x + h * T::two()) * T::lit(4.0) + f(x + h * T::lit(3.0)) * T::lit(1.5)) / h;
    let sing = singular_points::<T>();
    if sing.contains(&x) {
        return (left(x) + right(x)) * T::half();
    }
    let reach = h * T::lit(3.0);
    if sing.iter().any(|&s| s > x && s - x <= reach) {
        // singularity ahead: backward stencil through x
        return (f(x) * T::lit(3.0) - f(x - h) * T::lit(4.0) + f(x - h * T::two())) / (T::two() * h);
    }
    if sing.iter().any(|&s| s < x && x - s <= reach) {
        return -(f(x) * T::lit(3.0) - f(x + h) * T::lit(4.0) + f(x + h * T::two())) / (T::two() * h);
    }
    (f(x + h) - f(x - h)) / (T::two() * h)
}

/// `aₙ(x) = ω₂ₙ(x) + i ω′₂ₙ₊₁(x)` (complex; the imaginary part is a diagnostic).
pub fn a_coefficient<T: Real>(x: T, n: usize, expansion: Expansion) -> Cx<T> {
    let w = omega_at(x, 2 * n, expansion).omega[2 * n];
    w + i_unit::<T>() * omega_derivative(x, 2 * n + 1, expansion)
}

/// Physical-unit factor of `αₙ(x) = 2m(L/2ħ)^{2(n+1)} aₙ(2x/L)`.
pub fn alpha_factor<T: Real>(params: &PhysicalParams<T>, n: usize) -> T {
    T::two() * params.m * (params.l / (T::two() * params.hbar)).powi(2 * (n as i32 + 1))
}

/// Tabulated coefficients with parity and reality diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffTable<T> {
    pub expansion: Expansion,
    /// Dimensionless sample points.
    pub x: Vec<T>,
    /// `omega[n][i] = ωₙ(xᵢ)`, `n ≤ n_max`.
    pub omega: Vec<Vec<Cx<T>>>,
    /// `a[n][i] = Re aₙ(xᵢ)`, `n ≤ 2`.
    pub a: Vec<Vec<T>>,
    /// Removed `1/p` coefficient per point.
    pub pole_residue: Vec<Cx<T>>,
    pub diagnostics: CoeffDiagnostics<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffDiagnostics<T> {
    /// max |Im ωₙ| over even n and all points
    pub max_imag_even: T,
    /// max |Re ωₙ| over odd n
    pub max_real_odd: T,
    /// max |Im aₙ|
    pub max_imag_a: T,
    /// indices where a reality invariant exceeds the tolerance
    pub flagged: Vec<usize>,
    pub tolerance: T,
}

/// Number of `aₙ` kept by the tables (`n = 0, 1, 2`).
pub const A_TERMS: usize = 3;

/// Builds a [`CoeffTable`] on the given dimensionless points.
pub fn extract_coeffs<T: Real>(x: &[T], n_max: usize, expansion: Expansion) -> Result<CoeffTable<T>> {
    if n_max < 2 * A_TERMS - 1 {
        return Err(Error::invalid("n_max", format!("need n_max >= {} to form a0..a2", 2 * A_TERMS - 1)));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("x", "non-finite sample point"));
    }
    let rows: Vec<(MomentSet<T>, Vec<Cx<T>>)> = x
        .par_iter()
        .map(|&xi| {
            let m = omega_at(xi, n_max, expansion);
            let a: Vec<Cx<T>> = (0..A_TERMS)
                .map(|n| m.omega[2 * n] + i_unit::<T>() * omega_derivative(xi, 2 * n + 1, expansion))
                .collect();
            (m, a)
        })
        .collect();
    let tol = T::lit(1e-8);
    let mut d = CoeffDiagnostics {
        max_imag_even: T::zero(),
        max_real_odd: T::zero(),
        max_imag_a: T::zero(),
        flagged: Vec::new(),
        tolerance: tol,
    };
    let mut omega = vec![Vec::with_capacity(x.len()); n_max + 1];
    let mut a = vec![Vec::with_capacity(x.len()); A_TERMS];
    let mut pole_residue = Vec::with_capacity(x.len());
    for (i, (m, ai)) in rows.into_iter().enumerate() {
        let mut bad = false;
        for (n, w) in m.omega.iter().enumerate() {
            if n % 2 == 0 {
                d.max_imag_even = d.max_imag_even.max(w.im.abs());
                bad |= w.im.abs() > tol;
            } else {
                d.max_real_odd = d.max_real_odd.max(w.re.abs());
                bad |= w.re.abs() > tol;
            }
            omega[n].push(*w);
        }
        for (n, v) in ai.iter().enumerate() {
            d.max_imag_a = d.max_imag_a.max(v.im.abs());
            bad |= v.im.abs() > tol;
            a[n].push(v.re);
        }
        if bad {
            d.flagged.push(i);
        }
        pole_residue.push(m.pole_residue);
    }
    Ok(CoeffTable { expansion, x: x.to_vec(), omega, a, pole_residue, diagnostics: d })
}

/// Default table grid: 801 points on `[-4, 4]`.
pub fn default_table_grid<T: Real>() -> Vec<T> {
    UniformGrid::new(T::lit(-4.0), T::lit(4.0), 801).expect("valid").points()
}

impl<T: Real> CoeffTable<T> {
    /// `αₙ(x_phys)` at the physical points `L xᵢ / 2`.
    pub fn alpha(&self, params: &PhysicalParams<T>) -> Vec<Vec<T>> {
        (0..A_TERMS)
            .map(|n| {
                let f = alpha_factor(params, n);
                self.a[n].iter().map(|v| *v * f).collect()
            })
            .collect()
    }

    pub fn max_abs_a(&self) -> [T; A_TERMS] {
        let mut out = [T::zero(); A_TERMS];
        for (n, o) in out.iter_mut().enumerate() {
            *o = self.a[n].iter().fold(T::zero(), |m, v| m.max(v.abs()));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Interpolation, effective mass and potential

/// Dimensionless points where the `aₙ` jump (ν is discontinuous there).
pub fn jump_points<T: Real>() -> [T; 2] {
    [-T::one(), T::one()]
}

/// `αₙ(x)` in physical units, interpolated from a [`CoeffTable`].
///
/// The `aₙ` are polynomials between consecutive integers of `[-3, 3]`, so
/// each such cell carries its own cubic spline. The jumps at `±1` are kept as
/// jumps and the values are exactly zero for `|x| ≥ 3L/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaInterpolant<T> {
    pub params: PhysicalParams<T>,
    splines: Vec<PiecewiseSpline<T>>,
    factors: Vec<T>,
}

impl<T: Real> AlphaInterpolant<T> {
    pub fn new(params: PhysicalParams<T>, table: &CoeffTable<T>) -> Result<Self> {
        params.validate()?;
        let breaks: Vec<T> = (-3..=3).map(|k| T::lit(f64::from(k))).collect();
        let jumps = jump_points::<T>();
        let splines = (0..A_TERMS)
            .map(|n| PiecewiseSpline::new(&table.x, &table.a[n], &breaks, &jumps))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::invalid("table", format!("coefficient grid must contain every integer of [-3, 3]: {e}")))?;
        let factors = (0..A_TERMS).map(|n| alpha_factor(&params, n)).collect();
        Ok(Self { params, splines, factors })
    }

    pub fn terms(&self) -> usize {
        self.splines.len()
    }

    fn scale(&self, n: usize, (v, dv): (T, T)) -> (T, T) {
        let f = self.factors[n];
        (f * v, f * dv * T::two() / self.params.l)
    }

    /// `(αₙ(x), αₙ′(x))` at a physical position; the mean of both sides at a jump.
    pub fn alpha(&self, n: usize, x: T) -> (T, T) {
        let xd = self.params.x_to_dimless(x);
        if xd.abs() >= T::lit(3.0) {
            return (T::zero(), T::zero());
        }
        self.scale(n, self.splines[n].eval(xd))
    }

    /// One-sided `(αₙ, αₙ′)`.
    pub fn alpha_side(&self, n: usize, x: T, side: Side) -> (T, T) {
        let xd = self.params.x_to_dimless(x);
        if xd.abs() >= T::lit(3.0) {
            return (T::zero(), T::zero());
        }
        self.scale(n, self.splines[n].eval_side(xd, side))
    }

    /// Physical positions of the cell ends `0, ±L/2, ±L, ±3L/2`; the
    /// coefficients jump at `±L/2` and have kinks at the others.
    pub fn break_positions(&self) -> [T; 7] {
        singular_points::<T>().map(|x| self.params.x_from_dimless(x))
    }
}

/// `m_eff(x) = m / (1 + 2mζ²α₁(x))`.
pub fn effective_mass<T: Real>(interp: &AlphaInterpolant<T>, x: T) -> Result<T> {
    let p = &interp.params;
    let den = T::one() + T::two() * p.m * p.zeta * p.zeta * interp.alpha(1, x).0;
    if !(den > T::zero()) {
        return Err(Error::SingularMass {
            x: x.to_f64().unwrap_or(f64::NAN),
            denominator: den.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(p.m / den)
}

/// `w(x) = ζ²α₀(x)`.
pub fn w_potential<T: Real>(interp: &AlphaInterpolant<T>, x: T) -> T {
    let p = &interp.params;
    p.zeta * p.zeta * interp.alpha(0, x).0
}

// ---------------------------------------------------------------------------
// Operator-action oracle

/// `½ Σ_{n<terms} {aₙ, p²ⁿ} ψ` on `grid`, `p² = -D₂` with three-point second
/// differences and Dirichlet ends; `aₙ` from the closed form.
pub fn truncated_symbol_action<T: Real>(
    grid: &UniformGrid<T>,
    psi: &[Cx<T>],
    terms: usize,
    expansion: Expansion,
) -> Vec<Cx<T>> {
    let pts = grid.points();
    let a: Vec<Vec<T>> = (0..terms)
        .map(|n| pts.par_iter().map(|&x| a_coefficient(x, n, expansion).re).collect())
        .collect();
    let p2 = |f: &[Cx<T>]| -> Vec<Cx<T>> {
        let n = f.len();
        let inv = T::one() / (grid.h * grid.h);
        (0..n)
            .map(|i| {
                let l = if i > 0 { f[i - 1] } else { re(T::zero()) };
                let r = if i + 1 < n { f[i + 1] } else { re(T::zero()) };
                -(l + r - f[i] * T::two()) * inv
            })
            .collect()
    };
    let mut out = vec![re(T::zero()); psi.len()];
    for (n, an) in a.iter().enumerate() {
        let mut right = psi.to_vec(); // p²ⁿψ
        let mut left: Vec<Cx<T>> = psi.iter().zip(an).map(|(v, c)| *v * *c).collect(); // p²ⁿ(aψ)
        for _ in 0..n {
            right = p2(&right);
            left = p2(&left);
        }
        for i in 0..psi.len() {
            out[i] = out[i] + (right[i] * an[i] + left[i]) * T::half();
        }
    }
    out
}

/// Comparison of the truncated symbol with the kernel on one packet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionComparison<T> {
    pub x0: T,
    pub p0: T,
    pub sigma: T,
    /// `‖h₂ψ_kernel - h₂ψ_truncated‖ / ‖h₂ψ_kernel‖`
    pub relative_error: T,
}

/// Compares [`truncated_symbol_action`] with direct quadrature of the h₂ kernel
/// for a Gaussian packet.
pub fn compare_symbol_action<T: Real>(
    grid: &UniformGrid<T>,
    x0: T,
    p0: T,
    sigma: T,
    terms: usize,
    expansion: Expansion,
) -> ActionComparison<T> {
    let psi = grid.sample(|x| TestFunction::Gaussian { x0, p0, sigma }.value(x));
    let exact = grid.apply_kernel(|x, y| re(h2_kernel(x, y)), &psi);
    let approx = truncated_symbol_action(grid, &psi, terms, expansion);
    let diff: Vec<T> = exact.iter().zip(&approx).map(|(a, b)| (*a - *b).norm_sqr()).collect();
    let base: Vec<T> = exact.iter().map(|a| a.norm_sqr()).collect();
    ActionComparison {
        x0,
        p0,
        sigma,
        relative_error: (grid.integrate(&diff) / grid.integrate(&base)).sqrt(),
    }
}
