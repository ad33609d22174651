//! Reduced units and shared numerical tolerances.
//!
//! Everything inside the crate works with ħ = k_B = M = 1. Temperatures are
//! measured against ħω₀ for the oscillator and against ħγ for the free
//! particle; [`make_reduced`] and [`ReducedParams::to_physical`] are the only
//! places where SI quantities appear.

use crate::error::{domain, Result};

/// Reduced Planck constant in J·s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant in J/K (exact).
pub const K_B: f64 = 1.380_649e-23;

/// Which energy scale the reduced temperature is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// theta = k_B T / ħω₀
    Oscillator,
    /// theta = k_B T / ħγ
    FreeParticle,
}

/// Dimensionless system and bath parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedParams {
    pub convention: Convention,
    /// Reduced temperature in the active convention.
    pub theta: f64,
    /// γ/ω₀; `None` for the free particle.
    pub alpha: Option<f64>,
    /// ω_D/γ; `f64::INFINITY` encodes strict ohmic damping.
    pub cutoff_ratio: f64,
}

/// Temperature and frequencies in SI units (K and rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub temperature: f64,
    pub omega0: f64,
    pub gamma: f64,
    pub omega_d: f64,
}

fn check_cutoff(cutoff_ratio: f64) -> Result<()> {
    if cutoff_ratio.is_nan() || cutoff_ratio <= 0.0 {
        return Err(domain(format!("cutoff ratio must be positive, got {cutoff_ratio}")));
    }
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(domain(format!("reduced temperature must be positive and finite, got {theta}")));
    }
    Ok(())
}

impl ReducedParams {
    pub fn oscillator(theta: f64, alpha: f64, cutoff_ratio: f64) -> Result<Self> {
        check_theta(theta)?;
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(domain(format!("damping ratio must be non-negative, got {alpha}")));
        }
        check_cutoff(cutoff_ratio)?;
        Ok(Self {
            convention: Convention::Oscillator,
            theta,
            alpha: Some(alpha),
            cutoff_ratio,
        })
    }

    pub fn free_particle(theta_gamma: f64, cutoff_ratio: f64) -> Result<Self> {
        check_theta(theta_gamma)?;
        check_cutoff(cutoff_ratio)?;
        Ok(Self {
            convention: Convention::FreeParticle,
            theta: theta_gamma,
            alpha: None,
            cutoff_ratio,
        })
    }

    pub fn is_ohmic(&self) -> bool {
        self.cutoff_ratio.is_infinite()
    }

    /// Inverse of [`make_reduced`]. `reference` is ω₀ for the oscillator
    /// convention and γ for the free particle, in rad/s.
    pub fn to_physical(&self, reference: f64) -> PhysicalParams {
        let temperature = self.theta * HBAR * reference / K_B;
        let (omega0, gamma) = match self.convention {
            Convention::Oscillator => (reference, self.alpha.unwrap_or(0.0) * reference),
            Convention::FreeParticle => (0.0, reference),
        };
        let omega_d = if self.is_ohmic() {
            f64::INFINITY
        } else {
            self.cutoff_ratio * gamma
        };
        PhysicalParams {
            temperature,
            omega0,
            gamma,
            omega_d,
        }
    }
}

/// Converts SI inputs to reduced parameters.
///
/// `omega0 > 0` selects the oscillator convention; `omega0 == 0` selects the
/// free particle, which then needs `gamma > 0` to set the temperature scale.
/// Pass `f64::INFINITY` as `omega_d` for strict ohmic damping.
pub fn make_reduced(temperature: f64, omega0: f64, gamma: f64, omega_d: f64) -> Result<ReducedParams> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(domain(format!("temperature must be positive, got {temperature}")));
    }
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(domain(format!("gamma must be non-negative, got {gamma}")));
    }
    if !(omega0.is_finite() && omega0 >= 0.0) {
        return Err(domain(format!("omega0 must be non-negative, got {omega0}")));
    }
    let cutoff_ratio = if omega_d.is_infinite() && omega_d > 0.0 {
        f64::INFINITY
    } else if gamma == 0.0 {
        return Err(domain("a finite cutoff needs gamma > 0 to define omega_D/gamma"));
    } else {
        omega_d / gamma
    };
    let thermal = K_B * temperature / HBAR;
    if omega0 > 0.0 {
        ReducedParams::oscillator(thermal / omega0, gamma / omega0, cutoff_ratio)
    } else if gamma > 0.0 {
        ReducedParams::free_particle(thermal / gamma, cutoff_ratio)
    } else {
        Err(domain("free particle needs gamma > 0 to set the temperature scale"))
    }
}

/// Numerical targets shared by the summation, quadrature and
/// finite-difference routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative bound on the Matsubara truncation error.
    pub rel_sum_tail: f64,
    /// Absolute quadrature target.
    pub quad_abs: f64,
    /// Relative temperature step for numerical specific heats.
    pub fd_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel_sum_tail: 1e-12,
            quad_abs: 1e-10,
            fd_step: 1e-5,
        }
    }
}

impl Tolerances {
    pub fn new(rel_sum_tail: f64, quad_abs: f64, fd_step: f64) -> Result<Self> {
        for (name, v) in [("rel_sum_tail", rel_sum_tail), ("quad_abs", quad_abs), ("fd_step", fd_step)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            rel_sum_tail,
            quad_abs,
            fd_step,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use proptest::prelude::*;

    const OMEGA0: f64 = 2.0e13;

    fn temperature_for(theta: f64, freq: f64) -> f64 {
        theta * HBAR * freq / K_B
    }

    #[test]
    fn unit_temperature_oscillator() {
        let p = make_reduced(temperature_for(1.0, OMEGA0), OMEGA0, 0.0, f64::INFINITY).unwrap();
        assert_eq!(p.convention, Convention::Oscillator);
        assert!((p.theta - 1.0).abs() < 1e-15);
        assert_eq!(p.alpha, Some(0.0));
        assert!(p.is_ohmic());
    }

    #[test]
    fn unit_temperature_free_particle() {
        let gamma = 3.0e12;
        let p = make_reduced(temperature_for(1.0, gamma), 0.0, gamma, f64::INFINITY).unwrap();
        assert_eq!(p.convention, Convention::FreeParticle);
        assert!((p.theta - 1.0).abs() < 1e-15);
        assert_eq!(p.alpha, None);
    }

    #[test]
    fn drude_ratios() {
        let gamma = 2.0 * OMEGA0;
        let p = make_reduced(temperature_for(0.5, OMEGA0), OMEGA0, gamma, 10.0 * gamma).unwrap();
        assert!((p.theta - 0.5).abs() < 1e-15);
        assert!((p.alpha.unwrap() - 2.0).abs() < 1e-15);
        assert!((p.cutoff_ratio - 10.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(make_reduced(0.0, OMEGA0, 0.0, f64::INFINITY), Err(Error::Domain(_))));
        assert!(matches!(make_reduced(-1.0, OMEGA0, 0.0, f64::INFINITY), Err(Error::Domain(_))));
        assert!(matches!(make_reduced(1.0, OMEGA0, -1.0, f64::INFINITY), Err(Error::Domain(_))));
        assert!(matches!(make_reduced(1.0, 0.0, 0.0, f64::INFINITY), Err(Error::Domain(_))));
        assert!(ReducedParams::oscillator(1.0, 1.0, 0.0).is_err());
        assert!(Tolerances::new(0.0, 1e-10, 1e-5).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(theta in 1e-4f64..1e3, alpha in 0.0f64..10.0, ratio in 0.01f64..100.0, w0 in 1e9f64..1e15) {
            let t = temperature_for(theta, w0);
            let gamma = alpha * w0;
            let wd = if gamma > 0.0 { ratio * gamma } else { f64::INFINITY };
            let p = make_reduced(t, w0, gamma, wd).unwrap();
            let back = p.to_physical(w0);
            prop_assert!(((back.temperature - t) / t).abs() < 1e-14);
            prop_assert!((back.omega0 - w0).abs() <= 1e-14 * w0);
            prop_assert!((back.gamma - gamma).abs() <= 1e-14 * w0);
            if gamma > 0.0 {
                prop_assert!(((back.omega_d - wd) / wd).abs() < 1e-14);
            }
        }

        #[test]
        fn ratios_scale_invariant(theta in 1e-3f64..1e2, alpha in 0.01f64..10.0, ratio in 0.01f64..100.0, k in 1e-3f64..1e3) {
            let w0 = 1e13;
            let a = make_reduced(temperature_for(theta, w0), w0, alpha * w0, ratio * alpha * w0).unwrap();
            let b = make_reduced(k * temperature_for(theta, w0), k * w0, k * alpha * w0, k * ratio * alpha * w0).unwrap();
            prop_assert!((a.alpha.unwrap() - b.alpha.unwrap()).abs() <= 1e-14 * alpha);
            prop_assert!((a.cutoff_ratio - b.cutoff_ratio).abs() <= 1e-14 * ratio);
            prop_assert!((a.theta - b.theta).abs() <= 1e-14 * theta);
        }
    }
}
