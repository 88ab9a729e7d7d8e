//! Pre-classical Hamiltonian `H̃(x, p) = p²/2m + ζ² Σ_{n≤2} αₙ(x) p²ⁿ` and its
//! trajectories.
//!
//! This is the symbol of the equivalent Hermitian Hamiltonian with operators
//! replaced by phase-space variables; no `ħ → 0` limit is taken and closed
//! orbits say nothing about bound states.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hequiv::{effective_mass, w_potential, AlphaInterpolant, CoeffTable, A_TERMS};
use crate::params::PhysicalParams;
use crate::scalar::Real;
use crate::spline::Side;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalHamiltonian<T> {
    pub(crate) alpha: AlphaInterpolant<T>,
    /// Highest `n` kept in `Σ αₙ p²ⁿ` (at most 2).
    pub order: usize,
}

/// Point in phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState<T> {
    pub x: T,
    pub p: T,
    pub t: T,
}

impl<T: Real> PhaseState<T> {
    pub fn new(x: T, p: T) -> Self {
        Self { x, p, t: T::zero() }
    }
}

impl<T: Real> ClassicalHamiltonian<T> {
    pub fn new(params: PhysicalParams<T>, table: &CoeffTable<T>, order: usize) -> Result<Self> {
        if order >= A_TERMS {
            return Err(Error::invalid("order", format!("at most {} supported", A_TERMS - 1)));
        }
        Ok(Self { alpha: AlphaInterpolant::new(params, table)?, order })
    }

    pub fn params(&self) -> &PhysicalParams<T> {
        &self.alpha.params
    }

    /// Half width `3L/2` of the region where the motion is not free.
    pub fn region(&self) -> T {
        self.params().interaction_half_width()
    }

    pub fn energy(&self, x: T, p: T) -> T {
        let par = self.params();
        let z2 = par.zeta * par.zeta;
        let p2 = p * p;
        let mut h = p2 / (T::two() * par.m);
        let mut p2n = T::one();
        for n in 0..=self.order {
            h += z2 * self.alpha.alpha(n, x).0 * p2n;
            p2n *= p2;
        }
        h
    }

    /// `(∂H/∂p, ∂H/∂x)`.
    pub fn gradient(&self, x: T, p: T) -> (T, T) {
        let par = self.params();
        let z2 = par.zeta * par.zeta;
        let p2 = p * p;
        let mut dx = T::zero();
        let mut p2n = T::one();
        for n in 0..=self.order {
            dx += z2 * self.alpha.alpha(n, x).1 * p2n;
            p2n *= p2;
        }
        (self.velocity(x, p), dx)
    }

    pub fn effective_mass(&self, x: T) -> Result<T> {
        effective_mass(&self.alpha, x)
    }

    pub fn w(&self, x: T) -> T {
        w_potential(&self.alpha, x)
    }
}

impl<T: Real> ClassicalHamiltonian<T> {
    fn velocity(&self, x: T, p: T) -> T {
        let par = self.params();
        let z2 = par.zeta * par.zeta;
        let p2 = p * p;
        let mut v = p / par.m;
        let mut pk = p; // p^{2n-1}
        for n in 1..=self.order {
            v += z2 * self.alpha.alpha(n, x).0 * T::two() * T::from_usize_lossy(n) * pk;
            pk *= p2;
        }
        v
    }

    fn force(&self, x: T, p: T) -> T {
        -self.gradient(x, p).1
    }

    fn field(&self, y: [T; 2]) -> [T; 2] {
        [self.velocity(y[0], y[1]), self.force(y[0], y[1])]
    }
}

impl<T: Real> ClassicalHamiltonian<T> {
    /// Coefficients `(α₀, α₁, α₂)` seen from one side (zero above `order`).
    fn coefficients(&self, x: T, side: Side) -> [T; 3] {
        let mut c = [T::zero(); 3];
        for (n, v) in c.iter_mut().enumerate().take(self.order + 1) {
            *v = self.alpha.alpha_side(n, x, side).0;
        }
        c
    }

    fn energy_with(&self, c: [T; 3], p: T) -> T {
        let par = self.params();
        let z2 = par.zeta * par.zeta;
        let p2 = p * p;
        p2 / (T::two() * par.m) + z2 * (c[0] + c[1] * p2 + c[2] * p2 * p2)
    }

    /// Energy with the coefficients of `side` (matters only at a jump).
    pub fn energy_side(&self, x: T, p: T, side: Side) -> T {
        self.energy_with(self.coefficients(x, side), p)
    }

    /// Energy of a recorded state; on a cell end the side the motion heads into is used.
    pub fn state_energy(&self, s: &PhaseState<T>) -> T {
        if self.alpha.break_positions().contains(&s.x) {
            let side = if self.velocity(s.x, s.p) >= T::zero() { Side::Right } else { Side::Left };
            return self.energy_side(s.x, s.p, side);
        }
        self.energy(s.x, s.p)
    }

    /// Momentum after meeting the cell end at `x` from side `from`: transmitted
    /// with `H` conserved when the far side admits it, otherwise reflected.
    /// Where the coefficients are continuous this returns `p` up to rounding.
    pub fn interface_momentum(&self, x: T, p: T, from: Side) -> (T, bool) {
        let to = match from {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        };
        let e = self.energy_side(x, p, from);
        let c = self.coefficients(x, to);
        let par = self.params();
        let z2 = par.zeta * par.zeta;
        // A q² + B q + C = 0 with q = p'²; the root continuous in A → 0
        let a = z2 * c[2];
        let b = T::one() / (T::two() * par.m) + z2 * c[1];
        let cc = z2 * c[0] - e;
        let disc = b * b - T::lit(4.0) * a * cc;
        if disc >= T::zero() && b > T::zero() {
            let q = -T::two() * cc / (b + disc.sqrt());
            if q > T::zero() {
                let pt = q.sqrt() * p.signum();
                return (pt, true);
            }
        }
        (-p, false)
    }
}

/// Integration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings<T> {
    pub dt: T,
    pub t_end: T,
    /// Convergence tolerance of the implicit stage equations.
    pub tol: T,
    pub max_iterations: usize,
    /// Record every `stride`-th step.
    pub stride: usize,
}

impl<T: Real> Default for IntegratorSettings<T> {
    fn default() -> Self {
        Self {
            dt: T::lit(5e-3),
            t_end: T::lit(100.0),
            tol: T::lit(1e-14),
            max_iterations: 200,
            stride: 10,
        }
    }
}

/// One step of the two-stage Gauss–Legendre method (order 4, symplectic,
/// symmetric). The stage equations are solved by fixed-point iteration.
pub fn gauss_step<T: Real>(ham: &ClassicalHamiltonian<T>, s: PhaseState<T>, dt: T, tol: T, max_iterations: usize) -> Result<PhaseState<T>> {
    let r3 = T::lit(3.0).sqrt();
    let q = T::lit(0.25);
    let a = [[q, q - r3 / T::lit(6.0)], [q + r3 / T::lit(6.0), q]];
    let y0 = [s.x, s.p];
    let f0 = ham.field(y0);
    let mut k = [f0, f0];
    for _ in 0..max_iterations {
        let mut next = k;
        for i in 0..2 {
            let yi = [
                y0[0] + dt * (a[i][0] * k[0][0] + a[i][1] * k[1][0]),
                y0[1] + dt * (a[i][0] * k[0][1] + a[i][1] * k[1][1]),
            ];
            next[i] = ham.field(yi);
        }
        let delta = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .fold(T::zero(), |m, (i, j)| m.max((next[i][j] - k[i][j]).abs()));
        k = next;
        let scale = T::one() + k[0][0].abs().max(k[0][1].abs());
        if delta * dt.abs() <= tol * scale {
            let h = dt * T::half();
            return Ok(PhaseState {
                x: y0[0] + h * (k[0][0] + k[1][0]),
                p: y0[1] + h * (k[0][1] + k[1][1]),
                t: s.t + dt,
            });
        }
    }
    Err(Error::StepRejected { t: s.t.to_f64().unwrap_or(f64::NAN), iterations: max_iterations })
}

/// One step of length `dt`. The step is split on every cell end of the
/// coefficients it meets, so that no stage straddles a jump or kink, and
/// [`ClassicalHamiltonian::interface_momentum`] is applied there.
///
/// A trial step whose stage equations do not converge is treated as having
/// reached the next cell end ahead (straddling stages are what break the
/// fixed-point iteration).
pub fn advance<T: Real>(ham: &ClassicalHamiltonian<T>, s: PhaseState<T>, dt: T, settings: &IntegratorSettings<T>) -> Result<PhaseState<T>> {
    let breaks = ham.alpha.break_positions();
    let step = |from: PhaseState<T>, h: T| gauss_step(ham, from, h, settings.tol, settings.max_iterations);
    let mut cur = s;
    let mut remaining = dt;
    for _ in 0..16 {
        let full = step(cur, remaining);
        let target = match &full {
            Ok(next) => {
                let crossed = breaks.iter().copied().filter(|&xb| {
                    let d0 = cur.x - xb;
                    let d1 = next.x - xb;
                    d0 != T::zero() && (d1 == T::zero() || d0.signum() != d1.signum())
                });
                // nearest crossed end
                crossed.min_by(|a, b| (*a - cur.x).abs().partial_cmp(&(*b - cur.x).abs()).expect("finite"))
            }
            Err(_) => {
                let v = ham.velocity(cur.x, cur.p) * remaining;
                let reach = v.abs() * T::two();
                breaks
                    .iter()
                    .copied()
                    .filter(|&xb| (xb - cur.x) * v > T::zero() && (xb - cur.x).abs() <= reach)
                    .min_by(|a, b| (*a - cur.x).abs().partial_cmp(&(*b - cur.x).abs()).expect("finite"))
            }
        };
        let Some(xb) = target else {
            let mut next = full?;
            next.t = cur.t + remaining;
            return Ok(next);
        };
        let from = if cur.x < xb { Side::Left } else { Side::Right };
        let before = |st: &PhaseState<T>| match from {
            Side::Left => st.x < xb,
            Side::Right => st.x > xb,
        };
        // bisect on the fraction of the remaining step
        let (mut lo, mut hi) = (T::zero(), T::one());
        let mut at = cur;
        for _ in 0..64 {
            let mid = (lo + hi) * T::half();
            if mid <= lo || mid >= hi {
                break;
            }
            match step(cur, remaining * mid) {
                Ok(trial) if before(&trial) => {
                    lo = mid;
                    at = trial;
                }
                _ => hi = mid,
            }
        }
        let (p, _) = ham.interface_momentum(xb, at.p, from);
        cur = PhaseState { x: xb, p, t: cur.t + remaining * lo };
        remaining = remaining * (T::one() - lo);
    }
    Err(Error::StepRejected { t: s.t.to_f64().unwrap_or(f64::NAN), iterations: 16 })
}

/// Closed/open classification of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitClass {
    /// Returned to the starting section `x = x₀` with the initial sign of `p`
    /// without leaving the interaction region.
    Closed,
    /// Left the interaction region.
    Open,
    /// Neither within `t_end`.
    Undetermined,
}

impl OrbitClass {
    pub fn label(self) -> &'static str {
        match self {
            OrbitClass::Closed => "closed",
            OrbitClass::Open => "open",
            OrbitClass::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub initial: PhaseState<T>,
    pub states: Vec<PhaseState<T>>,
    pub energies: Vec<T>,
    pub class: OrbitClass,
    /// First return time to the starting section, for closed orbits.
    pub period: Option<T>,
    pub max_relative_energy_error: T,
}

/// Stepping policy after classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopRule {
    /// Run to `t_end` regardless.
    Never,
    /// Stop once the orbit is classified; open orbits are followed until they
    /// are `margin` beyond the region so that the free segment is recorded.
    Classified,
}

/// Fixed-step trajectory from `initial`.
pub fn integrate<T: Real>(
    ham: &ClassicalHamiltonian<T>,
    initial: PhaseState<T>,
    settings: &IntegratorSettings<T>,
    stop: StopRule,
) -> Result<Trajectory<T>> {
    if !(settings.dt != T::zero() && settings.dt.is_finite()) {
        return Err(Error::invalid("dt", "must be finite and nonzero"));
    }
    if !(settings.t_end.abs() > T::zero()) || settings.stride == 0 {
        return Err(Error::invalid("t_end", "must be nonzero with positive stride"));
    }
    if !(initial.x.is_finite() && initial.p.is_finite()) {
        return Err(Error::invalid("initial", "non-finite phase state"));
    }
    let region = ham.region();
    let e0 = ham.state_energy(&initial);
    let steps = (settings.t_end / settings.dt).abs().ceil().to_usize().unwrap_or(0);
    let mut s = initial;
    let mut states = vec![s];
    let mut energies = vec![e0];
    let mut class = OrbitClass::Undetermined;
    let mut period = None;
    let mut escaped_at: Option<T> = None;
    let mut worst = T::zero();
    let rel = |e: T| (e - e0).abs() / e0.abs().max(T::min_positive_value());
    let started_inside = initial.x.abs() < region;
    let mut left_section = false;
    for step in 1..=steps {
        let mut next = advance(ham, s, settings.dt, settings)?;
        next.t = initial.t + settings.dt * T::from_usize_lossy(step);
        let e = ham.state_energy(&next);
        worst = worst.max(rel(e));
        if class == OrbitClass::Undetermined {
            if next.x.abs() >= region {
                if started_inside || next.x.abs() > initial.x.abs() {
                    class = OrbitClass::Open;
                    escaped_at = Some(next.t);
                }
            } else if started_inside {
                // Poincaré return: crossing x = x₀ in the initial direction
                let d0 = s.x - initial.x;
                let d1 = next.x - initial.x;
                left_section |= d1.abs() > T::zero() && step > 1;
                let forward = if initial.p >= T::zero() { d0 < T::zero() && d1 >= T::zero() } else { d0 > T::zero() && d1 <= T::zero() };
                if left_section && forward && step > 2 {
                    class = OrbitClass::Closed;
                    let frac = d0.abs() / (d0.abs() + d1.abs());
                    period = Some(s.t + frac * settings.dt - initial.t);
                }
            }
        }
        s = next;
        if step % settings.stride == 0 || step == steps {
            states.push(s);
            energies.push(e);
        }
        let done = match (stop, class) {
            (StopRule::Never, _) | (_, OrbitClass::Undetermined) => false,
            (StopRule::Classified, OrbitClass::Closed) => true,
            (StopRule::Classified, OrbitClass::Open) => s.x.abs() > region * T::lit(1.5) || escaped_at.is_some_and(|t| (s.t - t).abs() > T::lit(10.0)),
        };
        if done {
            if step % settings.stride != 0 {
                states.push(s);
                energies.push(e);
            }
            break;
        }
    }
    Ok(Trajectory { initial, states, energies, class, period, max_relative_energy_error: worst })
}

/// Initial conditions and trajectories of a phase portrait.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePortrait<T> {
    pub trajectories: Vec<Trajectory<T>>,
}

impl<T: Real> PhasePortrait<T> {
    pub fn count(&self, class: OrbitClass) -> usize {
        self.trajectories.iter().filter(|t| t.class == class).count()
    }
}

/// Default initial conditions: `x₀ = 0` with `p₀ = ±0.05, ±0.10, …, ±2`,
/// interior starts `x₀ = ±0.5` with small momenta, and incoming particles
/// from `x₀ = -(3L/2 + 1)` with `p₀ ∈ {0.25, 0.5, 1, 1.5, 2}`.
pub fn default_initial_conditions<T: Real>(params: &PhysicalParams<T>) -> Vec<PhaseState<T>> {
    let mut out = Vec::new();
    for k in 1..=40 {
        let p = T::lit(0.05) * T::from_usize_lossy(k);
        out.push(PhaseState::new(T::zero(), p));
        out.push(PhaseState::new(T::zero(), -p));
    }
    let half = params.l / T::lit(4.0);
    for p in [0.02, 0.06, 0.1] {
        out.push(PhaseState::new(half, T::lit(p)));
        out.push(PhaseState::new(-half, T::lit(-p)));
    }
    let start = -(params.interaction_half_width() + T::one());
    for p in [0.25, 0.5, 1.0, 1.5, 2.0] {
        out.push(PhaseState::new(start, T::lit(p)));
    }
    out
}

/// Integrates every initial condition (in parallel), stopping each once classified.
pub fn phase_portrait<T: Real>(
    ham: &ClassicalHamiltonian<T>,
    initial: &[PhaseState<T>],
    settings: &IntegratorSettings<T>,
) -> Result<PhasePortrait<T>> {
    let trajectories = initial
        .par_iter()
        .map(|s| integrate(ham, *s, settings, StopRule::Classified))
        .collect::<Result<Vec<_>>>()?;
    Ok(PhasePortrait { trajectories })
}

/// Smallest `p₀ > 0` at `x₀` whose orbit is open, by bisection on the
/// classification between a closed `lo` and an open `hi`.
pub fn closed_open_threshold<T: Real>(
    ham: &ClassicalHamiltonian<T>,
    x0: T,
    mut lo: T,
    mut hi: T,
    settings: &IntegratorSettings<T>,
    tol: T,
) -> Result<T> {
    let class = |p: T| integrate(ham, PhaseState::new(x0, p), settings, StopRule::Classified).map(|t| t.class);
    if class(lo)? != OrbitClass::Closed || class(hi)? != OrbitClass::Open {
        return Err(Error::NonConvergence { what: "threshold bisection", detail: "bracket does not separate closed from open".into() });
    }
    while hi - lo > tol {
        let mid = (lo + hi) * T::half();
        match class(mid)? {
            OrbitClass::Closed => lo = mid,
            OrbitClass::Open => hi = mid,
            OrbitClass::Undetermined => {
                return Err(Error::NonConvergence { what: "threshold bisection", detail: "orbit not classified within t_end".into() })
            }
        }
    }
    Ok((lo + hi) * T::half())
}

/// Samples of `(x, m_eff(x), w(x))` on `n` points of `[-x_max, x_max]`.
pub fn mass_profile<T: Real>(ham: &ClassicalHamiltonian<T>, x_max: T, n: usize) -> Result<Vec<(T, T, T)>> {
    let grid = crate::grid::UniformGrid::new(-x_max, x_max, n)?;
    grid.points()
        .into_iter()
        .map(|x| Ok((x, ham.effective_mass(x)?, ham.w(x))))
        .collect()
}
