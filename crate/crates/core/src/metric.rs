//! First-order metric operator `η₊ = 1 + Z η₊₁ + O(Z²)` and `Q₁ = -η₊₁`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensystem::{build_phi, Branch};
use crate::error::{Error, Result};
use crate::quadrature::{extrapolate_to_zero, GaussLegendre};
use crate::scalar::{im, Cx, Real};

/// `g(s) = ⅛(4 + 2|s| - |s+2| - |s-2|)`, which is `|s|/4` for `|s| ≤ 2` and `½` beyond.
///
/// Evaluated in the simplified form so that `g(-s) = g(s)` holds bit for bit.
#[inline]
pub fn g_profile<T: Real>(s: T) -> T {
    s.abs().min(T::two()) * T::lit(0.25)
}

/// Derivative of [`g_profile`], `⅛(2 sign s - sign(s+2) - sign(s-2))` with `sign(0) = 0`.
#[inline]
pub fn g_profile_slope<T: Real>(s: T) -> T {
    let two = T::two();
    (two * s.sign0() - (s + two).sign0() - (s - two).sign0()) / T::lit(8.0)
}

/// Regular part of `⟨x|η₊₁|y⟩ = i g(x+y) sign(x-y)`.
#[inline]
pub fn eta1_kernel<T: Real>(x: T, y: T) -> Cx<T> {
    im(g_profile(x + y) * (x - y).sign0())
}

/// `⟨x|Q₁|y⟩ = -⟨x|η₊₁|y⟩`.
#[inline]
pub fn q1_kernel<T: Real>(x: T, y: T) -> Cx<T> {
    -eta1_kernel(x, y)
}

/// A kernel `δ_coeff·δ(x-y) + Z^order · regular(x, y)`.
///
/// The δ part is kept symbolic; only `regular` is ever sampled.
#[derive(Clone, Copy)]
pub struct Kernel<T> {
    pub delta_coeff: T,
    pub order_in_z: u8,
    pub regular: fn(T, T) -> Cx<T>,
}

impl<T: Real> Kernel<T> {
    /// `η₊ = δ + Z η₊₁`.
    pub fn eta() -> Self {
        Self { delta_coeff: T::one(), order_in_z: 1, regular: eta1_kernel }
    }

    /// `Q₁` alone (no δ part).
    pub fn q1() -> Self {
        Self { delta_coeff: T::zero(), order_in_z: 1, regular: q1_kernel }
    }

    /// Regular part including its power of `Z`.
    pub fn regular_at(&self, x: T, y: T, z: T) -> Cx<T> {
        (self.regular)(x, y) * z.powi(i32::from(self.order_in_z))
    }
}

impl<T> std::fmt::Debug for Kernel<T>
where
    T: std::fmt::Debug,
{
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Kernel")
            .field("delta_coeff", &self.delta_coeff)
            .field("order_in_z", &self.order_in_z)
            .finish_non_exhaustive()
    }
}

/// Open intervals `I₁ = (-∞,-1)`, `I₋ = (-1,0)`, `I₊ = (0,1)`, `I₂ = (1,∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Block {
    One,
    Minus,
    Plus,
    Two,
}

impl Block {
    pub const ALL: [Block; 4] = [Block::One, Block::Minus, Block::Plus, Block::Two];

    /// Interval end points, using ±∞ for the outer blocks.
    pub fn bounds<T: Real>(self) -> (T, T) {
        match self {
            Block::One => (T::neg_infinity(), -T::one()),
            Block::Minus => (-T::one(), T::zero()),
            Block::Plus => (T::zero(), T::one()),
            Block::Two => (T::one(), T::infinity()),
        }
    }

    pub fn contains<T: Real>(self, x: T) -> bool {
        let (a, b) = self.bounds::<T>();
        x > a && x < b
    }

    /// Block containing `x`, or `None` on a breakpoint.
    pub fn of<T: Real>(x: T) -> Option<Block> {
        Block::ALL.into_iter().find(|b| b.contains(x))
    }

    pub fn label(self) -> &'static str {
        match self {
            Block::One => "1",
            Block::Minus => "-",
            Block::Plus => "+",
            Block::Two => "2",
        }
    }
}

/// Per-block O(Z) coefficient `E_{μ,ν}(x, y)` as tabulated block by block.
///
/// Diagonal blocks return only the regular part (the δ is implied).
pub fn block_kernel<T: Real>(mu: Block, nu: Block, x: T, y: T) -> Result<Cx<T>> {
    if !mu.contains(x) || !nu.contains(y) || (mu == nu && x == y) {
        return Err(Error::DomainViolation {
            block: format!("E[{},{}]", mu.label(), nu.label()),
            x: x.to_f64().unwrap_or(f64::NAN),
            y: y.to_f64().unwrap_or(f64::NAN),
        });
    }
    let s = x + y;
    let two = T::two();
    let eighth = T::lit(0.125);
    let quarter = T::lit(0.25);
    let left = two - s - (s + two).abs(); // 2 - s - |s+2|
    let right = two + s - (s - two).abs(); // 2 + s - |s-2|
    let full = T::lit(4.0) + two * s.abs() - (s + two).abs() - (s - two).abs();
    let sg = (x - y).sign0();
    use Block::*;
    let c = match (mu, nu) {
        (One, One) | (Two, Two) => T::half() * sg,
        (Minus, One) | (Plus, One) => eighth * left,
        (One, Minus) | (One, Plus) => -eighth * left,
        (Two, One) => eighth * full,
        (One, Two) => -eighth * full,
        (Minus, Minus) => -quarter * sg * s,
        (Plus, Plus) => quarter * sg * s,
        (Plus, Minus) => quarter * s.abs(),
        (Minus, Plus) => -quarter * s.abs(),
        (Two, Minus) | (Two, Plus) => eighth * right,
        (Minus, Two) | (Plus, Two) => -eighth * right,
    };
    Ok(im(c))
}

/// Settings of the spectral-integral oracle for `η₊₁`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralSettings<T> {
    /// Central-difference step in `Z`, scaled by `min(1, k²)` at each `k`.
    pub dz: T,
    /// Damping levels `ε` for `∫ F(k) e^{-εk} dk`, extrapolated to `ε → 0`.
    pub eps_levels: Vec<T>,
    /// The k-integral is cut at `cutoff / ε`, where the damping is `e^{-cutoff}`.
    pub cutoff: T,
    /// Width of each Gauss–Legendre panel in `k`.
    pub panel_width: T,
    pub nodes: usize,
}

impl<T: Real> Default for SpectralSettings<T> {
    fn default() -> Self {
        Self {
            dz: T::lit(1e-4),
            eps_levels: vec![T::lit(0.2), T::lit(0.1), T::lit(0.05), T::lit(0.025)],
            cutoff: T::lit(40.0),
            panel_width: T::half(),
            nodes: 16,
        }
    }
}

/// Extrapolated first-order kernel value with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate<T> {
    pub value: Cx<T>,
    /// Difference between the extrapolation over all levels and over the
    /// coarsest ones only.
    pub extrapolation_error: T,
}

/// `Σ_± φ^±_k(x) φ^±_k(y)*` at signed strength `z`.
fn spectral_density<T: Real>(x: T, y: T, k: T, z: T) -> Cx<T> {
    Branch::BOTH
        .iter()
        .map(|&b| {
            let phi = build_phi(k, z, b).expect("k > 0 inside the oracle");
            phi.evaluate(x) * phi.evaluate(y).conj()
        })
        .fold(Cx::new(T::zero(), T::zero()), |a, b| a + b)
}

/// First-order coefficient of `⟨x|η₊|y⟩` from the spectral integral
/// `∫₀^∞ Σ_± φ^±_k(x) φ^±_k(y)* dk`, differentiated numerically in `Z`.
///
/// The k-integrand only decays like `1/k`, so it is damped by `e^{-εk}` and
/// the results are extrapolated polynomially to `ε = 0`.
pub fn eta1_spectral_oracle<T: Real>(x: T, y: T, settings: &SpectralSettings<T>) -> Result<SpectralEstimate<T>> {
    if x == y {
        return Err(Error::invalid("(x, y)", "the oracle needs x != y"));
    }
    if settings.eps_levels.len() < 2 || settings.eps_levels.iter().any(|e| *e <= T::zero()) {
        return Err(Error::invalid("eps_levels", "need at least two positive damping levels"));
    }
    let gl = GaussLegendre::<T>::new(settings.nodes);
    let fd = |k: T| {
        let d = settings.dz * T::one().min(k * k);
        (spectral_density(x, y, k, d) - spectral_density(x, y, k, -d)) / (T::two() * d)
    };
    let values: Vec<Cx<T>> = settings
        .eps_levels
        .iter()
        .map(|&eps| {
            let kmax = settings.cutoff / eps;
            let panels = (kmax / settings.panel_width).ceil().to_usize().unwrap_or(1).max(1);
            let w = kmax / T::from_usize_lossy(panels);
            (0..panels)
                .map(|p| {
                    let a = w * T::from_usize_lossy(p);
                    gl.integrate(a, a + w, |k| fd(k) * (-eps * k).exp())
                })
                .fold(Cx::new(T::zero(), T::zero()), |a, b| a + b)
        })
        .collect();
    let n = values.len();
    let value = extrapolate_to_zero(&settings.eps_levels, &values);
    let coarse = extrapolate_to_zero(&settings.eps_levels[..n - 1], &values[..n - 1]);
    let extrapolation_error = (value - coarse).norm();
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::NonConvergence {
            what: "spectral oracle",
            detail: format!("non-finite estimate at ({x}, {y})"),
        });
    }
    Ok(SpectralEstimate { value, extrapolation_error })
}

/// Runs the oracle over many pairs in parallel.
pub fn eta1_spectral_oracle_batch<T: Real>(
    pairs: &[(T, T)],
    settings: &SpectralSettings<T>,
) -> Vec<Result<SpectralEstimate<T>>> {
    pairs
        .par_iter()
        .map(|&(x, y)| eta1_spectral_oracle(x, y, settings))
        .collect()
}

/// Sample pairs spanning all 16 blocks, two per block.
///
/// Both `|x - y|` and `|x + y|` stay at least 0.3: the damped k-integral
/// converges slowly near the kinks of the kernel at `x = y` and `x + y = 0`.
pub fn oracle_pairs<T: Real>() -> Vec<(T, T)> {
    let reps: [[f64; 4]; 4] = [
        [-2.6, -1.4, -3.5, -1.9],
        [-0.75, -0.3, -0.9, -0.5],
        [0.3, 0.8, 0.55, 0.95],
        [1.45, 2.5, 3.2, 1.9],
    ];
    let mut pairs = Vec::with_capacity(32);
    for xs in &reps {
        for ys in &reps {
            let mut found = 0;
            'search: for &x in xs {
                for &y in ys {
                    if (x - y).abs() >= 0.3 && (x + y).abs() >= 0.3 && !pairs.contains(&(x, y)) {
                        pairs.push((x, y));
                        found += 1;
                        if found == 2 {
                            break 'search;
                        }
                    }
                }
            }
        }
    }
    pairs.into_iter().map(|(x, y)| (T::lit(x), T::lit(y))).collect()
}
