//! Continuum eigenfunctions of `H = p² + iZν(x)` and of its adjoint.
//!
//! Each solution is a plane-wave superposition on the four regions
//! `(-∞,-1]`, `[-1,0]`, `[0,1]`, `[1,∞)`. The `H` solutions are normalised so
//! that `Z → 0` gives `e^{±ikx}/√(2π)`; the adjoint solutions are obtained by
//! `Z → -Z`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{extrapolate_to_zero, GaussLegendre};
use crate::scalar::{cx, i_unit, re, Cx, Real};

/// Degeneracy label: `u = 1, v = ±1` (and `r = 1, s = ±1` for the adjoint).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    #[inline]
    pub fn sign<T: Real>(self) -> T {
        match self {
            Branch::Plus => T::one(),
            Branch::Minus => -T::one(),
        }
    }
}

/// Which operator the solution diagonalises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    Hamiltonian,
    Adjoint,
}

/// The four constancy regions of the potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    /// (-∞, -1)
    Left,
    /// (-1, 0), where ν = +1
    Gain,
    /// (0, 1), where ν = -1
    Loss,
    /// (1, ∞)
    Right,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::Left, Region::Gain, Region::Loss, Region::Right];

    /// Region containing `x`; breakpoints belong to the region on their right,
    /// except `x = 1` which is assigned to `Right` as well.
    pub fn of<T: Real>(x: T) -> Region {
        if x < -T::one() {
            Region::Left
        } else if x < T::zero() {
            Region::Gain
        } else if x < T::one() {
            Region::Loss
        } else {
            Region::Right
        }
    }

    fn index(self) -> usize {
        match self {
            Region::Left => 0,
            Region::Gain => 1,
            Region::Loss => 2,
            Region::Right => 3,
        }
    }
}

/// Plane-wave amplitudes `a e^{iκx} + b e^{-iκx}` on one region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece<T> {
    pub wavenumber: Cx<T>,
    pub a: Cx<T>,
    pub b: Cx<T>,
}

impl<T: Real> Piece<T> {
    #[inline]
    pub fn value(&self, x: T) -> Cx<T> {
        let phase = i_unit::<T>() * self.wavenumber * x;
        self.a * phase.exp() + self.b * (-phase).exp()
    }

    #[inline]
    pub fn derivative(&self, x: T) -> Cx<T> {
        let phase = i_unit::<T>() * self.wavenumber * x;
        i_unit::<T>() * self.wavenumber * (self.a * phase.exp() - self.b * (-phase).exp())
    }
}

/// A continuum eigenfunction for wavenumber `k` and branch `±`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSolution<T> {
    pub k: T,
    pub z: T,
    pub operator: OperatorKind,
    pub branch: Branch,
    /// `√(k² + iZ)`, principal branch.
    pub k_plus: Cx<T>,
    /// `√(k² - iZ)`, principal branch.
    pub k_minus: Cx<T>,
    /// Pieces in region order `Left, Gain, Loss, Right`.
    pub pieces: [Piece<T>; 4],
}

fn check_k<T: Real>(k: T, z: T) -> Result<()> {
    if !(k > T::zero()) || !k.is_finite() {
        return Err(Error::invalid("k", format!("must be finite and > 0, got {k}")));
    }
    if !z.is_finite() {
        return Err(Error::invalid("Z", "must be finite"));
    }
    Ok(())
}

/// Closed-form pieces of the `H` eigenfunction for signed strength `z`
/// (negative `z` gives the adjoint).
fn pieces_for<T: Real>(k: T, z: T, v: T) -> (Cx<T>, Cx<T>, [Piece<T>; 4]) {
    let k2 = re(k * k);
    let k_plus = (k2 + cx(T::zero(), z)).sqrt();
    let k_minus = (k2 - cx(T::zero(), z)).sqrt();
    let ratio = (k_plus / k_minus).sqrt(); // (k₊/k₋)^{1/2}
    let inv8pi = T::one() / (T::lit(8.0) * T::PI()).sqrt();
    let inv2pi = T::one() / (T::two() * T::PI()).sqrt();
    let i = i_unit::<T>();
    let one = re(T::one());
    let vv = re(v);

    // Interior amplitudes. The gain region carries (k₊/k₋)^{+1/2}, the loss
    // region (k₊/k₋)^{-1/2}; this is what makes ψ′ continuous at x = 0.
    let a_gain = (one + ratio * vv) * inv8pi;
    let b_gain = (one - ratio * vv) * inv8pi;
    let a_loss = (one + vv / ratio) * inv8pi;
    let b_loss = (one - vv / ratio) * inv8pi;

    let (s, c) = (k_minus.sin(), k_minus.cos());
    let l_minus = |kk: T| (c - i * k_minus * s / kk) * T::half();
    let k_minus_fn = |kk: T| ratio * (k_minus * c / kk - i * s) * T::half();

    let a_left = (i * k).exp() * (l_minus(k) + k_minus_fn(k) * vv) * inv2pi;
    let b_left = (-i * k).exp() * (l_minus(-k) + k_minus_fn(-k) * vv) * inv2pi;

    let pieces = [
        Piece { wavenumber: re(k), a: a_left, b: b_left },
        Piece { wavenumber: k_minus, a: a_gain, b: b_gain },
        Piece { wavenumber: k_plus, a: a_loss, b: b_loss },
        Piece { wavenumber: re(k), a: a_left.conj(), b: b_left.conj() },
    ];
    (k_plus, k_minus, pieces)
}

/// Eigenfunction `ψ^±_k` of `H` with eigenvalue `k²`.
pub fn build_psi<T: Real>(k: T, z: T, branch: Branch) -> Result<EigenSolution<T>> {
    check_k(k, z)?;
    let (k_plus, k_minus, pieces) = pieces_for(k, z, branch.sign());
    Ok(EigenSolution {
        k,
        z,
        operator: OperatorKind::Hamiltonian,
        branch,
        k_plus,
        k_minus,
        pieces,
    })
}

/// Eigenfunction `φ^±_k` of `H†`, equal to `ψ^±_k` with `Z → -Z`.
pub fn build_phi<T: Real>(k: T, z: T, branch: Branch) -> Result<EigenSolution<T>> {
    check_k(k, z)?;
    let (_, _, pieces) = pieces_for(k, -z, branch.sign());
    let k2 = re(k * k);
    Ok(EigenSolution {
        k,
        z,
        operator: OperatorKind::Adjoint,
        branch,
        k_plus: (k2 + cx(T::zero(), z)).sqrt(),
        k_minus: (k2 - cx(T::zero(), z)).sqrt(),
        pieces,
    })
}

/// Residuals of the six matching conditions at x = -1, 0, 1 and the
/// PT conditions at x = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchingReport<T> {
    /// |value jump| and |derivative jump| at -1, 0, 1.
    pub jumps: [T; 6],
    /// |ψ₋(0) - ψ₊(0)*| and |ψ′₋(0) + ψ′₊(0)*|.
    pub pt: [T; 2],
}

impl<T: Real> MatchingReport<T> {
    pub fn max_jump(&self) -> T {
        self.jumps.iter().copied().fold(T::zero(), T::max)
    }

    pub fn max_pt(&self) -> T {
        self.pt.iter().copied().fold(T::zero(), T::max)
    }
}

impl<T: Real> EigenSolution<T> {
    #[inline]
    pub fn piece(&self, region: Region) -> &Piece<T> {
        &self.pieces[region.index()]
    }

    /// Eigenvalue `k²`.
    #[inline]
    pub fn energy(&self) -> T {
        self.k * self.k
    }

    /// Signed strength entering the differential equation:
    /// `Z` for `H`, `-Z` for `H†`.
    #[inline]
    pub fn effective_z(&self) -> T {
        match self.operator {
            OperatorKind::Hamiltonian => self.z,
            OperatorKind::Adjoint => -self.z,
        }
    }

    pub fn evaluate(&self, x: T) -> Cx<T> {
        self.piece(Region::of(x)).value(x)
    }

    pub fn derivative(&self, x: T) -> Cx<T> {
        self.piece(Region::of(x)).derivative(x)
    }

    /// Evaluates the analytic piece of `region` at `x`, even outside the region.
    pub fn evaluate_in(&self, region: Region, x: T) -> Cx<T> {
        self.piece(region).value(x)
    }

    pub fn matching_residuals(&self) -> MatchingReport<T> {
        let pairs = [
            (Region::Left, Region::Gain, -T::one()),
            (Region::Gain, Region::Loss, T::zero()),
            (Region::Loss, Region::Right, T::one()),
        ];
        let mut jumps = [T::zero(); 6];
        for (n, (l, r, x)) in pairs.into_iter().enumerate() {
            let (pl, pr) = (self.piece(l), self.piece(r));
            jumps[2 * n] = (pl.value(x) - pr.value(x)).norm();
            jumps[2 * n + 1] = (pl.derivative(x) - pr.derivative(x)).norm();
        }
        let (g, l) = (self.piece(Region::Gain), self.piece(Region::Loss));
        let zero = T::zero();
        let pt = [
            (g.value(zero) - l.value(zero).conj()).norm(),
            (g.derivative(zero) + l.derivative(zero).conj()).norm(),
        ];
        MatchingReport { jumps, pt }
    }

    /// `|-ψ'' + iZ_eff ν(x) ψ - k² ψ|` at `x`, with `ψ''` from a Richardson
    /// extrapolated central difference of the exact `ψ'` of the piece
    /// containing `x`.
    pub fn ode_residual(&self, x: T) -> T {
        let region = Region::of(x);
        let piece = self.piece(region);
        let scale = T::one().max(piece.wavenumber.norm());
        let h0 = T::lit(0.1) / scale;
        let hs = [h0, h0 * T::half(), h0 * T::lit(0.25), h0 * T::lit(0.125)];
        let second: Vec<Cx<T>> = hs
            .iter()
            .map(|&h| (piece.derivative(x + h) - piece.derivative(x - h)) / (T::two() * h))
            .collect();
        let hh: Vec<T> = hs.iter().map(|h| *h * *h).collect();
        let d2 = extrapolate_to_zero(&hh, &second);
        let v = cx(T::zero(), self.effective_z() * region_nu::<T>(region));
        (-d2 + v * piece.value(x) - piece.value(x) * self.energy()).norm()
    }

    /// Max of `|ψ(x) - e^{±ikx}/√(2π)|` over a uniform sample of `[-r, r]`.
    pub fn plane_wave_distance(&self, r: T, samples: usize) -> T {
        let norm = T::one() / (T::two() * T::PI()).sqrt();
        let s = self.branch.sign::<T>();
        (0..samples)
            .map(|j| {
                let x = -r + T::two() * r * T::from_usize_lossy(j) / T::from_usize_lossy(samples - 1);
                let free = (i_unit::<T>() * s * self.k * x).exp() * norm;
                (self.evaluate(x) - free).norm()
            })
            .fold(T::zero(), T::max)
    }
}

/// Value of ν inside a region.
pub(crate) fn region_nu<T: Real>(region: Region) -> T {
    match region {
        Region::Left | Region::Right => T::zero(),
        Region::Gain => T::one(),
        Region::Loss => -T::one(),
    }
}

/// Wronskian `ψ⁺ψ⁻′ - ψ⁺′ψ⁻` of the two branches at `x` (constant in `x`).
pub fn wronskian<T: Real>(plus: &EigenSolution<T>, minus: &EigenSolution<T>, x: T) -> Cx<T> {
    plus.evaluate(x) * minus.derivative(x) - plus.derivative(x) * minus.evaluate(x)
}

/// `∫_a^b e^{s x} dx`, stable for small `s`.
fn exp_integral<T: Real>(s: Cx<T>, a: T, b: T) -> Cx<T> {
    let w = b - a;
    if (s * w).norm() < T::lit(1e-4) {
        // e^{sa} * (w + s w²/2 + s² w³/6 + s³ w⁴/24)
        let sw = s * w;
        (s * a).exp() * (re(w) + sw * w * T::half() + sw * sw * w / T::lit(6.0) + sw * sw * sw * w / T::lit(24.0))
    } else {
        ((s * b).exp() - (s * a).exp()) / s
    }
}

/// Damped spatial overlap `∫ conj(φ(x)) ψ(x) e^{-ε|x|} dx` in closed form.
pub fn damped_overlap<T: Real>(phi: &EigenSolution<T>, psi: &EigenSolution<T>, eps: T) -> Cx<T> {
    let i = i_unit::<T>();
    let e = re(eps);
    let mut total = Cx::new(T::zero(), T::zero());
    for region in Region::ALL {
        let f = phi.piece(region);
        let g = psi.piece(region);
        let kc = f.wavenumber.conj();
        // conj(C e^{iκx} + D e^{-iκx}) = C* e^{-iκ*x} + D* e^{iκ*x}
        let terms = [
            (f.a.conj() * g.a, i * (g.wavenumber - kc)),
            (f.a.conj() * g.b, -i * (g.wavenumber + kc)),
            (f.b.conj() * g.a, i * (g.wavenumber + kc)),
            (f.b.conj() * g.b, i * (kc - g.wavenumber)),
        ];
        for (amp, s) in terms {
            let integral = match region {
                // e^{εx} on (-∞,-1]
                Region::Left => {
                    let t = s + e;
                    (-t).exp() / t
                }
                Region::Gain => exp_integral(s + e, -T::one(), T::zero()),
                Region::Loss => exp_integral(s - e, T::zero(), T::one()),
                Region::Right => {
                    let t = s - e;
                    -(t).exp() / t
                }
            };
            total += amp * integral;
        }
    }
    total
}

/// Settings for [`biorthonormality_check`].
#[derive(Debug, Clone)]
pub struct BiorthoSettings<T> {
    /// Gaussian window width in `ℓ`.
    pub window: T,
    /// Damping levels for extrapolation `ε → 0`.
    pub eps_levels: Vec<T>,
    /// Step of the central difference in `Z` for the first-order coefficient.
    pub dz: T,
}

impl<T: Real> Default for BiorthoSettings<T> {
    fn default() -> Self {
        Self {
            window: T::lit(0.3),
            eps_levels: vec![T::lit(0.04), T::lit(0.02), T::lit(0.01), T::lit(0.005)],
            dz: T::lit(1e-3),
        }
    }
}

/// Result of a smeared biorthonormality evaluation for one `(a, b)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiorthoReport<T> {
    pub a: Branch,
    pub b: Branch,
    /// `∫dℓ w(ℓ)⟨φ_{k0,a}|ψ_{ℓ,b}⟩ - δ_ab w(k0)` at the requested `Z`.
    pub deviation: Cx<T>,
    /// `∂/∂Z` of the smeared overlap at `Z = 0` (first-order coefficient).
    pub first_order: Cx<T>,
    /// Spread of the extrapolated value between the two finest ε subsets.
    pub extrapolation_spread: T,
}

fn smeared_overlap<T: Real>(
    k0: T,
    a: Branch,
    b: Branch,
    z: T,
    settings: &BiorthoSettings<T>,
) -> Result<(Cx<T>, T)> {
    let phi = build_phi(k0, z, a)?;
    let s = settings.window;
    let lo = (k0 - T::lit(8.0) * s).max(T::lit(1e-6));
    let hi = k0 + T::lit(8.0) * s;
    let gl = GaussLegendre::<T>::new(16);
    let mut values = Vec::with_capacity(settings.eps_levels.len());
    for &eps in &settings.eps_levels {
        // panels resolve the Lorentzian of width ε around ℓ = k0
        let panels = ((hi - lo) / (eps * T::half())).ceil().to_usize().unwrap_or(1).max(8);
        let mut acc = Cx::new(T::zero(), T::zero());
        let width = (hi - lo) / T::from_usize_lossy(panels);
        for p in 0..panels {
            let a0 = lo + width * T::from_usize_lossy(p);
            let part: Cx<T> = gl.integrate(a0, a0 + width, |l| {
                let psi = build_psi(l, z, b).expect("ℓ > 0");
                let w = (-(l - k0) * (l - k0) / (T::two() * s * s)).exp();
                damped_overlap(&phi, &psi, eps) * w
            });
            acc += part;
        }
        values.push(acc);
    }
    let n = values.len();
    let all = extrapolate_to_zero(&settings.eps_levels, &values);
    let spread = if n >= 3 {
        let coarse = extrapolate_to_zero(&settings.eps_levels[..n - 1], &values[..n - 1]);
        (all - coarse).norm()
    } else {
        T::zero()
    };
    if !all.re.is_finite() || !all.im.is_finite() {
        return Err(Error::NonConvergence {
            what: "damped biorthonormality integral",
            detail: "non-finite extrapolated value".into(),
        });
    }
    Ok((all, spread))
}

/// Smeared check of `⟨φ_{k,a}|ψ_{ℓ,b}⟩ = δ_ab δ(k-ℓ)`.
///
/// The ℓ-integral uses a Gaussian window centred on `k0`; the spatial
/// integral is damped by `e^{-ε|x|}` and extrapolated to `ε → 0`.
pub fn biorthonormality_check<T: Real>(
    k0: T,
    z: T,
    a: Branch,
    b: Branch,
    settings: &BiorthoSettings<T>,
) -> Result<BiorthoReport<T>> {
    check_k(k0, z)?;
    if settings.window <= T::zero() || k0 - T::lit(4.0) * settings.window <= T::zero() {
        return Err(Error::invalid("window", "window must be positive and resolve k0 away from 0"));
    }
    let target = if a == b { T::one() } else { T::zero() };
    let (value, spread) = smeared_overlap(k0, a, b, z, settings)?;
    let (vp, sp) = smeared_overlap(k0, a, b, settings.dz, settings)?;
    let (vm, sm) = smeared_overlap(k0, a, b, -settings.dz, settings)?;
    let tol = T::lit(1e-3);
    let worst = spread.max(sp).max(sm);
    if worst > tol {
        return Err(Error::NonConvergence {
            what: "damped biorthonormality integral",
            detail: format!("ε-extrapolation spread {worst} exceeds {tol}"),
        });
    }
    Ok(BiorthoReport {
        a,
        b,
        deviation: value - re(target),
        first_order: (vp - vm) / (T::two() * settings.dz),
        extrapolation_spread: worst,
    })
}
