//! Time evolution under `H = p² + iZν(x)` (dimensionless) with the L² norm
//! and the first-order physical norm `⟨ψ|ψ⟩ + Z⟨ψ|η₊₁ψ⟩` monitored side by side.
//!
//! The L² norm changes at `O(Z)`; the physical norm only at `O(Z²)`, the order
//! to which the metric is known.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::linalg::solve_tridiagonal;
use crate::metric::eta1_kernel;
use crate::params::nu;
use crate::quadrature::loglog_slope;
use crate::scalar::{cx, i_unit, re, Cx, Real};

/// Gaussian packet `e^{ip₀x} e^{-(x-x₀)²/(4σ²)}`, normalised in L².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Packet<T> {
    pub x0: T,
    pub p0: T,
    pub sigma: T,
}

impl<T: Real> Packet<T> {
    pub fn value(&self, x: T) -> Cx<T> {
        let u = (x - self.x0) / self.sigma;
        let norm = (T::two() * T::PI() * self.sigma * self.sigma).powf(-T::lit(0.25));
        (i_unit::<T>() * self.p0 * x).exp() * ((-u * u / T::lit(4.0)).exp() * norm)
    }

    /// Group velocity `2p₀` of the free motion.
    pub fn velocity(&self) -> T {
        T::two() * self.p0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig<T> {
    /// Box `[-half_width, half_width]` with hard walls.
    pub half_width: usize,
    pub per_unit: usize,
    pub z: T,
    pub dt: T,
    pub t_end: T,
    /// Norms are recorded every `log_every` steps (and at the end).
    pub log_every: usize,
}

impl<T: Real> Default for EvolutionConfig<T> {
    fn default() -> Self {
        Self {
            half_width: 40,
            per_unit: 20,
            z: T::lit(0.1),
            dt: T::lit(5e-3),
            t_end: T::lit(8.0),
            log_every: 20,
        }
    }
}

/// One row of the norm log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSample<T> {
    pub t: T,
    pub l2_norm: T,
    pub eta_norm: T,
    /// Imaginary part of the quadrature of `⟨ψ|η₊ψ⟩` (zero up to rounding).
    pub eta_norm_imag: T,
    /// `⟨x⟩` with the L² weight.
    pub mean_x: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionRun<T> {
    pub grid: UniformGrid<T>,
    pub state: Vec<Cx<T>>,
    pub t: T,
    pub z: T,
    pub log: Vec<NormSample<T>>,
}

impl<T: Real> EvolutionRun<T> {
    pub fn new(grid: UniformGrid<T>, state: Vec<Cx<T>>, z: T) -> Result<Self> {
        if state.len() != grid.n {
            return Err(Error::invalid("state", "length differs from the grid"));
        }
        if !z.is_finite() {
            return Err(Error::invalid("z", "must be finite"));
        }
        Ok(Self { grid, state, t: T::zero(), z, log: Vec::new() })
    }

    /// One Crank–Nicolson step `(1 + i dt H/2) ψ' = (1 - i dt H/2) ψ`, with
    /// `p²` the three-point Laplacian and Dirichlet walls. Negative `dt` runs
    /// backwards.
    pub fn step(&mut self, dt: T) -> Result<()> {
        let n = self.grid.n;
        let h2 = self.grid.h * self.grid.h;
        let half = cx(T::zero(), dt * T::half()); // i dt/2
        let off = -T::one() / h2;
        let pts = self.grid.points();
        let diag_h: Vec<Cx<T>> = pts.iter().map(|&x| cx(T::two() / h2, self.z * nu(x))).collect();
        let mut rhs = vec![re(T::zero()); n];
        for i in 0..n {
            let mut hpsi = diag_h[i] * self.state[i];
            if i > 0 {
                hpsi = hpsi + self.state[i - 1] * off;
            }
            if i + 1 < n {
                hpsi = hpsi + self.state[i + 1] * off;
            }
            rhs[i] = self.state[i] - half * hpsi;
        }
        let one = re(T::one());
        let lower = vec![half * off; n];
        let upper = lower.clone();
        let diag: Vec<Cx<T>> = diag_h.iter().map(|d| one + half * *d).collect();
        self.state = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
        self.t += dt;
        Ok(())
    }

    pub fn l2_norm(&self) -> T {
        let d: Vec<T> = self.state.iter().map(|v| v.norm_sqr()).collect();
        self.grid.integrate(&d)
    }

    /// `⟨ψ|ψ⟩ + Z⟨ψ|η₊₁ψ⟩` by the trapezoid rule (complex; the imaginary part
    /// is a quadrature diagnostic).
    pub fn eta_norm(&self) -> Cx<T> {
        eta_norm(&self.grid, &self.state, self.z)
    }

    pub fn mean_x(&self) -> T {
        let pts = self.grid.points();
        let num: Vec<T> = self.state.iter().zip(&pts).map(|(v, x)| v.norm_sqr() * *x).collect();
        self.grid.integrate(&num) / self.l2_norm()
    }

    pub fn record(&mut self) {
        let e = self.eta_norm();
        self.log.push(NormSample { t: self.t, l2_norm: self.l2_norm(), eta_norm: e.re, eta_norm_imag: e.im, mean_x: self.mean_x() });
    }
}

/// `⟨ψ|ψ⟩ + Z⟨ψ|η₊₁ψ⟩` for samples on `grid`.
pub fn eta_norm<T: Real>(grid: &UniformGrid<T>, psi: &[Cx<T>], z: T) -> Cx<T> {
    let w = grid.trapezoid();
    let pts = grid.points();
    let l2: T = psi.iter().zip(&w).map(|(v, wi)| v.norm_sqr() * *wi).sum();
    if z == T::zero() {
        return re(l2);
    }
    let cross = (0..grid.n)
        .into_par_iter()
        .map(|i| {
            if psi[i] == re(T::zero()) {
                return re(T::zero());
            }
            let row = (0..grid.n).fold(re(T::zero()), |acc, j| acc + eta1_kernel(pts[i], pts[j]) * psi[j] * w[j]);
            psi[i].conj() * row * w[i]
        })
        .reduce(|| re(T::zero()), |a, b| a + b);
    re(l2) + cross * z
}

/// Evolves `packet` under `config`, recording norms along the way.
///
/// Refuses runs that would resolve the carrier wavelength with fewer than 16
/// points or bring the packet centre within `5σ` of a wall.
pub fn evolve<T: Real>(packet: &Packet<T>, config: &EvolutionConfig<T>) -> Result<EvolutionRun<T>> {
    if !(config.dt > T::zero()) || !(config.t_end > T::zero()) || config.log_every == 0 {
        return Err(Error::invalid("dt", "dt and t_end must be positive, log_every nonzero"));
    }
    if !(packet.sigma > T::zero()) {
        return Err(Error::invalid("sigma", "must be positive"));
    }
    let grid = UniformGrid::symmetric(config.half_width, config.per_unit)?;
    if packet.p0 != T::zero() {
        let per_wavelength = T::two() * T::PI() / packet.p0.abs() / grid.h;
        if per_wavelength < T::lit(16.0) {
            return Err(Error::invalid("per_unit", format!("only {per_wavelength} points per wavelength (need 16)")));
        }
    }
    let wall = T::from_usize_lossy(config.half_width) - T::lit(5.0) * packet.sigma;
    let x_end = packet.x0 + packet.velocity() * config.t_end;
    if packet.x0.abs() > wall || x_end.abs() > wall {
        return Err(Error::invalid("t_end", "packet would come within 5 sigma of a wall"));
    }
    let state = grid.sample(|x| packet.value(x));
    let mut run = EvolutionRun::new(grid, state, config.z)?;
    run.record();
    let steps = (config.t_end / config.dt).round().to_usize().unwrap_or(0).max(1);
    for k in 1..=steps {
        run.step(config.dt)?;
        if k % config.log_every == 0 || k == steps {
            run.record();
        }
    }
    Ok(run)
}

/// Max deviation of the two norms from their initial values over a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormDrift<T> {
    pub z: T,
    pub eta_drift: T,
    pub l2_change: T,
    pub max_eta_imag: T,
}

pub fn drift<T: Real>(run: &EvolutionRun<T>) -> NormDrift<T> {
    let first = run.log[0];
    let mut d = NormDrift { z: run.z, eta_drift: T::zero(), l2_change: T::zero(), max_eta_imag: T::zero() };
    for s in &run.log {
        d.eta_drift = d.eta_drift.max((s.eta_norm - first.eta_norm).abs());
        d.l2_change = d.l2_change.max((s.l2_norm - first.l2_norm).abs());
        d.max_eta_imag = d.max_eta_imag.max(s.eta_norm_imag.abs());
    }
    d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftStudy<T> {
    pub drifts: Vec<NormDrift<T>>,
    pub eta_slope: T,
    pub l2_slope: T,
}

/// Same packet and grid for each `z`; slopes of the drifts against `z`.
pub fn drift_study<T: Real>(packet: &Packet<T>, config: &EvolutionConfig<T>, zs: &[T]) -> Result<DriftStudy<T>> {
    if zs.len() < 2 {
        return Err(Error::invalid("z", "need at least two coupling values"));
    }
    let drifts = zs
        .par_iter()
        .map(|&z| evolve(packet, &EvolutionConfig { z, ..*config }).map(|r| drift(&r)))
        .collect::<Result<Vec<_>>>()?;
    let e: Vec<T> = drifts.iter().map(|d| d.eta_drift).collect();
    let l: Vec<T> = drifts.iter().map(|d| d.l2_change).collect();
    Ok(DriftStudy { eta_slope: loglog_slope(zs, &e), l2_slope: loglog_slope(zs, &l), drifts })
}

/// Packet used for the scattering runs: from `x₀ = -10` towards the step with
/// `p₀ = 2`, `σ = 2`.
pub fn default_packet<T: Real>() -> Packet<T> {
    Packet { x0: T::lit(-10.0), p0: T::two(), sigma: T::two() }
}
