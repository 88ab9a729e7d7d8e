//! Pseudo-Hermitian observables `O = ρ⁻¹ o ρ` to first order in `Z`,
//! localized states and the physical probability density.
//!
//! With `ρ^{±1} = e^{∓Q/2}` and `Q = Q₁Z + …`, `O = o - ½[o, Q₁]Z + O(Z²)`,
//! `ρ ≈ 1 + ½η₊₁Z` and `ρ⁻¹ ≈ 1 - ½η₊₁Z`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{adjoint, frobenius, identity, UniformGrid};
use crate::metric::{eta1_kernel, g_profile, g_profile_slope, q1_kernel};
use crate::params::PhysicalParams;
use crate::scalar::{im, re, Cx, Real};

/// O(Z) part of `⟨x|X|y⟩`: `(i/2) g(x+y) |x-y|`. The base is `x δ(x-y)`.
#[inline]
pub fn x_kernel<T: Real>(x: T, y: T) -> Cx<T> {
    im(T::half() * g_profile(x + y) * (x - y).abs())
}

/// O(Z) part of `⟨x|P|y⟩`: `g′(x+y) sign(x-y)`. The base is `-i∂ₓδ(x-y)`.
#[inline]
pub fn p_kernel<T: Real>(x: T, y: T) -> Cx<T> {
    re(g_profile_slope(x + y) * (x - y).sign0())
}

/// O(Z) part of `⟨x|ξ^(y)⟩ = ⟨x|ρ⁻¹|y⟩`: `-½ η₊₁(x, y)`.
#[inline]
pub fn xi_kernel<T: Real>(x: T, y: T) -> Cx<T> {
    -eta1_kernel(x, y) * T::half()
}

/// The Hermitian operator `o` being mapped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseOperator {
    Identity,
    Position,
    Momentum,
}

/// `O = base + Z·correction` with the correction in closed form.
#[derive(Clone, Copy)]
pub struct ObservableKernel<T> {
    pub base: BaseOperator,
    pub correction: fn(T, T) -> Cx<T>,
}

impl<T: Real> ObservableKernel<T> {
    pub fn correction_at(&self, x: T, y: T) -> Cx<T> {
        (self.correction)(x, y)
    }

    /// Matrix of `O` on `grid` at strength `z` (δ → identity / h, so the base
    /// is diagonal for `x` and central differences for `p`).
    pub fn matrix(&self, grid: &UniformGrid<T>, z: T) -> Array2<Cx<T>> {
        let base = match self.base {
            BaseOperator::Identity => identity(grid.n),
            BaseOperator::Position => grid.diagonal_matrix(re),
            BaseOperator::Momentum => grid.momentum_matrix(),
        };
        let corr = grid.kernel_matrix(self.correction);
        base + corr.mapv(|v| v * z)
    }
}

impl<T: std::fmt::Debug> std::fmt::Debug for ObservableKernel<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ObservableKernel").field("base", &self.base).finish_non_exhaustive()
    }
}

fn zero_kernel<T: Real>(_: T, _: T) -> Cx<T> {
    Cx::new(T::zero(), T::zero())
}

/// `o ↦ o - ½[o, Q₁]Z` in closed form.
///
/// `[x, Q₁](x,y) = (x - y)Q₁(x,y)` and `[p, Q₁](x,y) = -i(∂ₓ + ∂_y)Q₁(x,y)`;
/// the `sign(x-y)` factor of `Q₁` is annihilated by `∂ₓ + ∂_y`.
pub fn observable_transform<T: Real>(base: BaseOperator) -> ObservableKernel<T> {
    let correction: fn(T, T) -> Cx<T> = match base {
        BaseOperator::Identity => zero_kernel,
        BaseOperator::Position => x_kernel,
        BaseOperator::Momentum => p_kernel,
    };
    ObservableKernel { base, correction }
}

/// Generic path: the O(Z) coefficient `-½[o, Q₁]` for a sampled operator.
pub fn correction_matrix<T: Real>(o: &Array2<Cx<T>>, grid: &UniformGrid<T>) -> Result<Array2<Cx<T>>> {
    if o.dim() != (grid.n, grid.n) {
        return Err(Error::invalid("o", format!("matrix shape {:?} does not match grid size {}", o.dim(), grid.n)));
    }
    let q = grid.kernel_matrix(q1_kernel);
    let comm = o.dot(&q) - q.dot(o);
    Ok(comm.mapv(|v| v * (-T::half())))
}

/// `ρ⁻¹|y⟩` to first order: `δ(x-y) - (Z/2)η₊₁(x,y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizedState<T> {
    pub center: T,
    pub z: T,
}

impl<T: Real> LocalizedState<T> {
    pub fn new(center: T, z: T) -> Self {
        Self { center, z }
    }

    /// Regular (non-δ) part of `⟨x|ξ^(y)⟩`; its real part is zero.
    pub fn regular(&self, x: T) -> Cx<T> {
        xi_kernel(x, self.center) * self.z
    }

    pub fn imag_part(&self, x: T) -> T {
        self.regular(x).im
    }
}

/// Physical-unit O(ζ) kernels obtained from the dimensionless ones through
/// the scaling maps.
pub mod physical {
    use super::*;

    fn scaled<T: Real>(p: &PhysicalParams<T>, x: T, y: T, f: fn(T, T) -> Cx<T>) -> Cx<T> {
        f(p.x_to_dimless(x), p.x_to_dimless(y)) * p.scale().z
    }

    /// `⟨x|X|y⟩ - xδ(x-y)`; `X = (L/2) X_d`.
    pub fn x_kernel<T: Real>(p: &PhysicalParams<T>, x: T, y: T) -> Cx<T> {
        let d = scaled(p, x, y, super::x_kernel);
        d * (p.x_from_dimless(T::one()) * p.kernel_density_from_dimless(T::one()))
    }

    /// `⟨x|P|y⟩ + iħ∂ₓδ(x-y)`; `P = (2ħ/L) P_d`.
    pub fn p_kernel<T: Real>(p: &PhysicalParams<T>, x: T, y: T) -> Cx<T> {
        let d = scaled(p, x, y, super::p_kernel);
        d * (p.p_from_dimless(T::one()) * p.kernel_density_from_dimless(T::one()))
    }

    /// `⟨x|ξ^(y)⟩ - δ(x-y)`.
    pub fn xi_kernel<T: Real>(p: &PhysicalParams<T>, x: T, y: T) -> Cx<T> {
        let d = scaled(p, x, y, super::xi_kernel);
        d * p.kernel_density_from_dimless(T::one())
    }
}

/// Physical density with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Density<T> {
    /// `ϱ(x_j)`, normalised so that its trapezoid integral is 1.
    pub rho: Vec<T>,
    /// `⟨ψ, ψ⟩₊ = ⟨ψ|ψ⟩ + Z⟨ψ|η₊₁ψ⟩`.
    pub eta_norm: T,
    /// `∫|⟨x|ρ|ψ⟩|² dx` before normalisation; equals `eta_norm` up to O(Z²).
    pub physical_norm: T,
}

/// `ϱ(x) = |⟨x|ρ|ψ⟩|² / ∫|⟨x|ρ|ψ⟩|²` with `ρ ≈ 1 + ½η₊₁Z` applied by
/// trapezoid quadrature.
pub fn physical_density<T: Real>(psi: &[Cx<T>], grid: &UniformGrid<T>, z: T) -> Result<Density<T>> {
    if psi.len() != grid.n {
        return Err(Error::invalid("psi", format!("expected {} samples, got {}", grid.n, psi.len())));
    }
    let l2: T = grid.integrate(&psi.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>());
    if !(l2 > T::zero()) {
        return Err(Error::ZeroNorm);
    }
    let eta_psi = grid.apply_kernel(eta1_kernel, psi);
    let mixed: Vec<Cx<T>> = psi.iter().zip(&eta_psi).map(|(a, b)| a.conj() * *b).collect();
    let eta_norm = l2 + (grid.integrate_cx(&mixed) * z).re;
    let phys: Vec<T> = psi
        .iter()
        .zip(&eta_psi)
        .map(|(a, b)| (*a + *b * (z * T::half())).norm_sqr())
        .collect();
    let physical_norm = grid.integrate(&phys);
    if !(physical_norm > T::zero()) {
        return Err(Error::ZeroNorm);
    }
    Ok(Density {
        rho: phys.into_iter().map(|v| v / physical_norm).collect(),
        eta_norm,
        physical_norm,
    })
}

/// Matrix of `η₊ = 1 + Zη₊₁` on the grid.
pub fn eta_matrix<T: Real>(grid: &UniformGrid<T>, z: T) -> Array2<Cx<T>> {
    identity(grid.n) + grid.kernel_matrix(eta1_kernel).mapv(|v| v * z)
}

/// `‖η₊O - O†η₊‖_F · h` for the discretised first-order observable.
pub fn pseudo_hermiticity_residual<T: Real>(base: BaseOperator, grid: &UniformGrid<T>, z: T) -> T {
    let eta = eta_matrix(grid, z);
    let o = observable_transform::<T>(base).matrix(grid, z);
    let r = eta.dot(&o) - adjoint(&o).dot(&eta);
    frobenius(&r) * grid.h
}

fn central_difference<T: Real>(grid: &UniformGrid<T>, f: &[Cx<T>]) -> Vec<Cx<T>> {
    let n = f.len();
    let c = Cx::new(T::zero(), -T::one() / (T::two() * grid.h));
    (0..n)
        .map(|i| {
            let up = if i + 1 < n { f[i + 1] } else { Cx::new(T::zero(), T::zero()) };
            let down = if i > 0 { f[i - 1] } else { Cx::new(T::zero(), T::zero()) };
            (up - down) * c
        })
        .collect()
}

/// `O f` (or `O† f`) on the grid: base by multiplication / central
/// differences, correction by trapezoid quadrature.
pub fn apply_observable<T: Real>(
    base: BaseOperator,
    grid: &UniformGrid<T>,
    z: T,
    f: &[Cx<T>],
    dagger: bool,
) -> Vec<Cx<T>> {
    let k = observable_transform::<T>(base);
    let b: Vec<Cx<T>> = match base {
        BaseOperator::Identity => f.to_vec(),
        BaseOperator::Position => f.iter().enumerate().map(|(i, v)| *v * grid.x(i)).collect(),
        BaseOperator::Momentum => central_difference(grid, f),
    };
    let corr = if dagger {
        grid.apply_kernel(|x, y| k.correction_at(y, x).conj(), f)
    } else {
        grid.apply_kernel(|x, y| k.correction_at(x, y), f)
    };
    b.iter().zip(&corr).map(|(a, c)| *a + *c * z).collect()
}

fn apply_eta<T: Real>(grid: &UniformGrid<T>, z: T, f: &[Cx<T>]) -> Vec<Cx<T>> {
    let e = grid.apply_kernel(eta1_kernel, f);
    f.iter().zip(&e).map(|(a, b)| *a + *b * z).collect()
}

/// `max_f ‖(η₊O - O†η₊) f‖ / ‖f‖` over smooth test functions, with the
/// residual norm taken over `|x| ≤ window`.
///
/// The kernels of `O` carry jump lines (the diagonal and the anti-diagonals
/// `x + y ∈ {0, ±2}`), so matrix norms of the discretised residual keep an
/// O(Z) discretisation floor; the action on smooth states does not. The
/// window keeps the box edges out: `η₊₁f` tends to the constants
/// `±(i/2)∫f` and is cut off there.
pub fn pseudo_hermiticity_weak_residual<T: Real>(
    base: BaseOperator,
    grid: &UniformGrid<T>,
    z: T,
    tests: &[Vec<Cx<T>>],
    window: T,
) -> T {
    let l2 = |v: &[Cx<T>]| {
        let masked: Vec<T> = v
            .iter()
            .enumerate()
            .map(|(i, c)| if grid.x(i).abs() <= window { c.norm_sqr() } else { T::zero() })
            .collect();
        grid.integrate(&masked).sqrt()
    };
    tests
        .iter()
        .map(|f| {
            let left = apply_eta(grid, z, &apply_observable(base, grid, z, f, false));
            let right = apply_observable(base, grid, z, &apply_eta(grid, z, f), true);
            let r: Vec<Cx<T>> = left.iter().zip(&right).map(|(a, b)| *a - *b).collect();
            l2(&r) / l2(f)
        })
        .fold(T::zero(), T::max)
}

/// Gaussian test battery `e^{ip₀x} e^{-(x-x₀)²/(2σ²)}` sampled on `grid`.
pub fn gaussian_battery<T: Real>(grid: &UniformGrid<T>, specs: &[(T, T, T)]) -> Vec<Vec<Cx<T>>> {
    specs
        .iter()
        .map(|&(x0, p0, s)| {
            grid.sample(|x| {
                let u = (x - x0) / s;
                Cx::new(T::zero(), p0 * x).exp() * (-T::half() * u * u).exp()
            })
        })
        .collect()
}

/// `‖(ρ⁻¹)†η₊ρ⁻¹ - 1‖_F · h`: the Gram matrix of localized states in the
/// physical inner product.
pub fn localized_gram_residual<T: Real>(grid: &UniformGrid<T>, z: T) -> T {
    let rho_inv = identity(grid.n) + grid.kernel_matrix(xi_kernel).mapv(|v| v * z);
    let gram = adjoint(&rho_inv).dot(&eta_matrix(grid, z)).dot(&rho_inv);
    frobenius(&(gram - identity(grid.n))) * grid.h
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn x_kernel_examples() {
        assert_eq!(x_kernel(2.0_f64, -2.0), Cx::new(0.0, 0.0));
        assert!((x_kernel(0.8_f64, 0.1) - Cx::new(0.0, 0.07875)).norm() < 1e-15);
        // nonlocal: the tail does not decay
        assert_eq!(x_kernel(40.0_f64, 2.0), Cx::new(0.0, 9.5));
    }

    #[test]
    fn p_kernel_examples() {
        assert_eq!(p_kernel(0.8_f64, 0.1), Cx::new(0.25, 0.0));
        assert_eq!(p_kernel(3.0_f64, 2.0), Cx::new(0.0, 0.0));
        // both sign factors flip under (x, y) -> (-x, -y)
        assert_eq!(p_kernel(-0.8_f64, -0.1), Cx::new(0.25, 0.0));
        // opposite sides of the support with |x + y| < 2 still couple
        assert_eq!(p_kernel(2.0_f64, -3.5), Cx::new(-0.25, 0.0));
    }

    #[test]
    fn localized_state_examples() {
        let s = LocalizedState::new(1.5_f64, 0.1);
        assert!((s.imag_part(2.0) + 0.025).abs() < 1e-16);
        assert_eq!(s.regular(2.0).re, 0.0);
        assert_eq!(LocalizedState::new(1.5_f64, 0.0).regular(2.0), Cx::new(0.0, 0.0));
        // far field: magnitude Z/4 regardless of distance
        let far = LocalizedState::new(3.0_f64, 0.1);
        assert!((far.imag_part(500.0).abs() - 0.025).abs() < 1e-16);
    }

    #[test]
    fn identity_transform_is_trivial() {
        let k = observable_transform::<f64>(BaseOperator::Identity);
        assert_eq!(k.correction_at(0.3, -0.7), Cx::new(0.0, 0.0));
    }

    #[test]
    fn generic_transform_matches_closed_forms() {
        // interior rows only: far rows feel the truncation of the box
        let mut prev = f64::INFINITY;
        for per_unit in [20usize, 40] {
            let grid = UniformGrid::<f64>::symmetric(6, per_unit).unwrap();
            let o = grid.diagonal_matrix(re);
            let c = correction_matrix(&o, &grid).unwrap();
            let mut worst: f64 = 0.0;
            for i in 0..grid.n {
                for j in 0..grid.n {
                    let (x, y) = (grid.x(i), grid.x(j));
                    if x.abs() < 2.0 && y.abs() < 2.0 {
                        worst = worst.max((c[[i, j]] / grid.h - x_kernel(x, y)).norm());
                    }
                }
            }
            assert!(worst < 1e-12, "position commutator is exact: {worst}");
            let p = grid.momentum_matrix();
            let cp = correction_matrix(&p, &grid).unwrap();
            // compare the smeared action on a smooth packet
            let f = grid.sample(|x| Cx::new((-(x - 0.2) * (x - 0.2)).exp(), 0.0));
            let exact = grid.apply_kernel(p_kernel, &f);
            let approx = cp.dot(&ndarray::Array1::from(f.clone()));
            let err = exact
                .iter()
                .zip(approx.iter())
                .zip(grid.points())
                .filter(|(_, x)| x.abs() < 2.0)
                .map(|((a, b), _)| (*a - *b).norm())
                .fold(0.0, f64::max);
            assert!(err < prev, "momentum commutator converges: {err} after {prev}");
            prev = err;
        }
        assert!(prev < 0.05);
    }

    #[test]
    fn density_free_case() {
        let grid = UniformGrid::<f64>::symmetric(8, 20).unwrap();
        let psi = grid.sample(|x| Cx::new((-x * x).exp(), 0.0));
        let d = physical_density(&psi, &grid, 0.0).unwrap();
        let norm: f64 = grid.integrate(&psi.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>());
        for (r, p) in d.rho.iter().zip(&psi) {
            assert!((r - p.norm_sqr() / norm).abs() < 1e-14);
        }
        assert!((d.eta_norm - norm).abs() < 1e-14);
    }

    #[test]
    fn density_rejects_zero_state() {
        let grid = UniformGrid::<f64>::symmetric(2, 5).unwrap();
        let psi = vec![Cx::new(0.0, 0.0); grid.n];
        assert_eq!(physical_density(&psi, &grid, 0.1), Err(Error::ZeroNorm));
    }

    #[test]
    fn physical_kernels_match_dimensional_formulas() {
        let p = PhysicalParams::new(0.7_f64, 1.3, 2.6, 0.4).unwrap();
        let (m, hb, l, zeta) = (p.m, p.hbar, p.l, p.zeta);
        let bracket = |s: f64| 2.0 * l + 2.0 * s.abs() - (s + l).abs() - (s - l).abs();
        let sgn = |v: f64| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 };
        for (x, y) in [(0.3, -0.9), (2.0, 1.1), (-0.2, 3.5), (0.6, 0.1)] {
            let s = x + y;
            let xk = Cx::new(0.0, m * zeta / (8.0 * hb * hb) * bracket(s) * (x - y).abs());
            assert!((physical::x_kernel(&p, x, y) - xk).norm() < 1e-14);
            let pk = m * zeta / (4.0 * hb) * (2.0 * sgn(s) - sgn(s + l) - sgn(s - l)) * sgn(x - y);
            assert!((physical::p_kernel(&p, x, y) - Cx::new(pk, 0.0)).norm() < 1e-14);
            let xi = Cx::new(0.0, -m * zeta / (8.0 * hb * hb) * bracket(s) * sgn(x - y));
            assert!((physical::xi_kernel(&p, x, y) - xi).norm() < 1e-14);
        }
    }

    #[test]
    fn physical_kernels_at_l_two() {
        // x_d = x when L = 2; only the factor Z = mζ·2/ħ² remains
        let p = PhysicalParams::new(0.5_f64, 1.0, 2.0, 0.3).unwrap();
        let z = p.scale().z;
        assert!((physical::p_kernel(&p, 0.8, 0.1) - p_kernel(0.8, 0.1) * z).norm() < 1e-15);
        assert!((physical::x_kernel(&p, 0.8, 0.1) - x_kernel(0.8, 0.1) * z).norm() < 1e-15);
    }

    #[test]
    fn gram_and_pseudo_hermiticity_are_second_order() {
        let grid = UniformGrid::<f64>::symmetric(4, 10).unwrap();
        let r1 = pseudo_hermiticity_residual(BaseOperator::Position, &grid, 0.1);
        let r2 = pseudo_hermiticity_residual(BaseOperator::Position, &grid, 0.2);
        assert!(((r2 / r1).log2() - 2.0).abs() < 0.05);
        let g1 = localized_gram_residual(&grid, 0.1);
        let g2 = localized_gram_residual(&grid, 0.2);
        assert!(((g2 / g1).log2() - 2.0).abs() < 0.05);
    }

    proptest! {
        #[test]
        fn kernel_symmetries(x in -5.0f64..5.0, y in -5.0f64..5.0) {
            prop_assert_eq!(x_kernel(x, y), x_kernel(y, x));
            prop_assert_eq!(p_kernel(y, x), -p_kernel(x, y));
            prop_assert_eq!(p_kernel(-x, -y), p_kernel(x, y));
            if x.abs() > 1.0 && y.abs() > 1.0 && x * y > 0.0 {
                prop_assert_eq!(p_kernel(x, y), Cx::new(0.0, 0.0));
            }
            prop_assert_eq!(xi_kernel(x, y).re, 0.0);
        }

        #[test]
        fn density_integrates_to_one(x0 in -2.0f64..2.0, p0 in -2.0f64..2.0, s in 0.3f64..1.5) {
            let grid = UniformGrid::<f64>::symmetric(10, 10).unwrap();
            let psi = grid.sample(|x| {
                let u = (x - x0) / s;
                Cx::new(0.0, p0 * x).exp() * (-0.5 * u * u).exp()
            });
            let d = physical_density(&psi, &grid, 0.2).unwrap();
            prop_assert!((grid.integrate(&d.rho) - 1.0).abs() < 1e-10);
        }
    }
}
