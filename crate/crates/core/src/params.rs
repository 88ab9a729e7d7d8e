//! Physical and dimensionless parameters, the step profile and the potential.
//!
//! Everything downstream works in dimensionless variables
//! `x_d = 2x/L`, `p_d = L p / (2ħ)`, `Z = m L² ζ / (2ħ²)`, `H_d = m L² H / (2ħ²)`.
//! Physical units only appear at the I/O boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{im, Cx, Real};

/// Heaviside step with `θ(0) = ½`.
#[inline]
pub fn theta<T: Real>(x: T) -> T {
    if x < T::zero() {
        T::zero()
    } else if x > T::zero() {
        T::one()
    } else {
        T::half()
    }
}

/// Dimensionless gain/loss profile `ν(x) = θ(x+1) + θ(x-1) - 2θ(x)`.
///
/// `+1` on (-1, 0), `-1` on (0, 1), `0` for |x| > 1 and at x = 0, `∓½` at x = ±1.
#[inline]
pub fn nu<T: Real>(x: T) -> T {
    theta(x + T::one()) + theta(x - T::one()) - T::two() * theta(x)
}

/// Dimensionless potential `v(x) = i Z ν(x)`.
#[inline]
pub fn potential<T: Real>(x: T, z: T) -> Cx<T> {
    im(z * nu(x))
}

/// Physical parameter set `(m, ħ, L, ζ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams<T> {
    pub m: T,
    pub hbar: T,
    /// Support width of the potential: v vanishes outside (-L/2, L/2).
    #[serde(rename = "L")]
    pub l: T,
    /// Non-Hermiticity strength.
    pub zeta: T,
}

impl<T: Real> PhysicalParams<T> {
    pub fn new(m: T, hbar: T, l: T, zeta: T) -> Result<Self> {
        let p = Self { m, hbar, l, zeta };
        p.validate()?;
        Ok(p)
    }

    /// Parameter values used for the effective-mass and phase-portrait figures:
    /// m = ½, ħ = 1, L = 2, ζ = ⅓.
    pub fn figure_defaults() -> Self {
        Self {
            m: T::lit(0.5),
            hbar: T::one(),
            l: T::two(),
            zeta: T::one() / T::lit(3.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be finite and > 0, got {v}")))
            }
        };
        positive("m", self.m)?;
        positive("hbar", self.hbar)?;
        positive("L", self.l)?;
        if !(self.zeta >= T::zero() && self.zeta.is_finite()) {
            return Err(Error::invalid(
                "zeta",
                format!("must be finite and >= 0, got {}", self.zeta),
            ));
        }
        Ok(())
    }

    /// Energy-to-dimensionless factor `m L² / (2ħ²)`.
    #[inline]
    pub fn energy_scale(&self) -> T {
        self.m * self.l * self.l / (T::two() * self.hbar * self.hbar)
    }

    pub fn scale(&self) -> ScaledParams<T> {
        ScaledParams {
            z: self.energy_scale() * self.zeta,
        }
    }

    #[inline]
    pub fn x_to_dimless(&self, x: T) -> T {
        T::two() * x / self.l
    }

    #[inline]
    pub fn x_from_dimless(&self, xd: T) -> T {
        self.l * xd / T::two()
    }

    #[inline]
    pub fn p_to_dimless(&self, p: T) -> T {
        self.l * p / (T::two() * self.hbar)
    }

    #[inline]
    pub fn p_from_dimless(&self, pd: T) -> T {
        T::two() * self.hbar * pd / self.l
    }

    #[inline]
    pub fn energy_to_dimless(&self, e: T) -> T {
        self.energy_scale() * e
    }

    #[inline]
    pub fn energy_from_dimless(&self, ed: T) -> T {
        ed / self.energy_scale()
    }

    /// Converts a δ-normalised kernel density `⟨x_d|A|y_d⟩` to `⟨x|A|y⟩`.
    /// Each continuous argument contributes `√(2/L)`, so the pair gives `2/L`.
    #[inline]
    pub fn kernel_density_from_dimless(&self, kd: T) -> T {
        T::two() * kd / self.l
    }

    #[inline]
    pub fn kernel_density_to_dimless(&self, k: T) -> T {
        self.l * k / T::two()
    }

    /// Half-width of the region outside of which the equivalent Hermitian
    /// Hamiltonian is free: `3L/2`.
    #[inline]
    pub fn interaction_half_width(&self) -> T {
        T::lit(1.5) * self.l
    }
}

/// Dimensionless non-Hermiticity `Z = m L² ζ / (2ħ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledParams<T> {
    #[serde(rename = "Z")]
    pub z: T,
}

impl<T: Real> ScaledParams<T> {
    pub fn new(z: T) -> Result<Self> {
        if z >= T::zero() && z.is_finite() {
            Ok(Self { z })
        } else {
            Err(Error::invalid("Z", format!("must be finite and >= 0, got {z}")))
        }
    }

    /// Recovers `ζ` for given `(m, ħ, L)`.
    pub fn zeta_for(&self, m: T, hbar: T, l: T) -> T {
        self.z * T::two() * hbar * hbar / (m * l * l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn theta_convention() {
        assert_eq!(theta(-1.0_f64), 0.0);
        assert_eq!(theta(0.0_f64), 0.5);
        assert_eq!(theta(2.0_f64), 1.0);
    }

    #[test]
    fn nu_values() {
        assert_eq!(nu(-0.5_f64), 1.0);
        assert_eq!(nu(0.5_f64), -1.0);
        assert_eq!(nu(2.0_f64), 0.0);
        assert_eq!(nu(-2.0_f64), 0.0);
        assert_eq!(nu(0.0_f64), 0.0);
        assert_eq!(nu(1.0_f64), -0.5);
        assert_eq!(nu(-1.0_f64), 0.5);
    }

    #[test]
    fn potential_values() {
        assert_eq!(potential(-0.5_f64, 0.3), Cx::new(0.0, 0.3));
        assert_eq!(potential(0.5_f64, 0.3), Cx::new(0.0, -0.3));
        for x in [-3.0, -0.7, 0.0, 0.4, 1.0, 5.0_f64] {
            assert_eq!(potential(x, 0.0), Cx::new(0.0, 0.0));
        }
    }

    #[test]
    fn figure_parameters_scale_to_one_third() {
        let p = PhysicalParams::<f64>::figure_defaults();
        assert!((p.scale().z - 1.0 / 3.0).abs() < 1e-15);
        let free = PhysicalParams::new(1.3, 0.7, 2.2, 0.0).unwrap();
        assert_eq!(free.scale().z, 0.0);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(PhysicalParams::new(0.0, 1.0, 1.0, 0.1_f64).is_err());
        assert!(PhysicalParams::new(1.0, -1.0, 1.0, 0.1_f64).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 0.0, 0.1_f64).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 1.0, -0.1_f64).is_err());
        assert!(ScaledParams::new(f64::NAN).is_err());
    }

    #[test]
    fn single_precision_instantiation() {
        assert_eq!(nu(-0.25_f32), 1.0);
        let p = PhysicalParams::<f32>::figure_defaults();
        assert!((p.scale().z - 1.0 / 3.0).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn nu_is_odd_and_compact(x in -5.0f64..5.0) {
            prop_assume!(x != 0.0 && x.abs() != 1.0);
            prop_assert_eq!(nu(-x), -nu(x));
            if x.abs() > 1.0 {
                prop_assert_eq!(nu(x), 0.0);
            }
        }

        #[test]
        fn potential_is_pt_symmetric(x in -5.0f64..5.0, z in 0.0f64..2.0) {
            prop_assert_eq!(potential(-x, z).conj(), potential(x, z));
        }

        #[test]
        fn scaling_maps_round_trip(
            x in -50.0f64..50.0,
            m in 0.1f64..10.0, hbar in 0.1f64..10.0, l in 0.1f64..10.0, zeta in 0.0f64..3.0,
        ) {
            let p = PhysicalParams::new(m, hbar, l, zeta).unwrap();
            let tol = 1e-14 * (1.0 + x.abs());
            prop_assert!((p.x_from_dimless(p.x_to_dimless(x)) - x).abs() <= tol);
            prop_assert!((p.p_from_dimless(p.p_to_dimless(x)) - x).abs() <= tol);
            prop_assert!((p.energy_from_dimless(p.energy_to_dimless(x)) - x).abs() <= tol);
            prop_assert!((p.kernel_density_to_dimless(p.kernel_density_from_dimless(x)) - x).abs() <= tol);
            let back = p.scale().zeta_for(m, hbar, l);
            prop_assert!((back - zeta).abs() <= 1e-14 * (1.0 + zeta));
        }
    }
}
