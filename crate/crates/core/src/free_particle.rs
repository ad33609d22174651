//! Specific heat of the free damped particle.
//!
//! Reduced units: `theta_gamma = k_B T/ħγ`, `cutoff_ratio = ω_D/γ` with
//! `f64::INFINITY` meaning strict ohmic damping. C is in units of k_B.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::matsubara::{energy_sum_regularized, DampingKernel, SumResult, System};
use crate::oscillator::ExpansionValue;
use crate::specfun::{trigamma, ComplexValue};
use crate::PrescriptionTag;

/// Below this |1 − 4/r| the Drude bracket is replaced by its limit.
const DEGENERATE_WIDTH: f64 = 1e-10;

/// Above this a = 1/(2πθ) the ohmic form switches to its asymptotic series.
const ASYMPTOTIC_A: f64 = 20.0;

/// One free-particle state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeParticlePoint {
    pub theta_gamma: f64,
    pub cutoff_ratio: f64,
    /// Reduced energy, when computed.
    pub energy: Option<f64>,
    pub specific_heat: f64,
}

fn check_theta(theta_gamma: f64) -> Result<()> {
    if !(theta_gamma.is_finite() && theta_gamma > 0.0) {
        return Err(domain(format!("theta_gamma must be positive and finite, got {theta_gamma}")));
    }
    Ok(())
}

fn check_ratio(cutoff_ratio: f64) -> Result<()> {
    if !(cutoff_ratio.is_finite() && cutoff_ratio > 0.0) {
        return Err(domain(format!("cutoff ratio must be positive and finite, got {cutoff_ratio}")));
    }
    Ok(())
}

/// C/k_B = 1/2 − a + a²ψ′(1+a) with a = 1/(2πθ_γ).
pub fn ohmic_specific_heat(theta_gamma: f64) -> Result<FreeParticlePoint> {
    check_theta(theta_gamma)?;
    let a = 1.0 / (2.0 * PI * theta_gamma);
    let c = if a >= ASYMPTOTIC_A {
        // a²ψ′(1+a) − a + 1/2 = Σ B_2k / a^(2k−1), k ≥ 1
        const B: [f64; 7] = [
            1.0 / 6.0,
            -1.0 / 30.0,
            1.0 / 42.0,
            -1.0 / 30.0,
            5.0 / 66.0,
            -691.0 / 2730.0,
            7.0 / 6.0,
        ];
        let inv2 = 1.0 / (a * a);
        B.iter().rev().fold(0.0, |acc, b| acc * inv2 + b) / a
    } else {
        0.5 - a + a * a * trigamma(ComplexValue::new(1.0 + a, 0.0))?.re
    };
    Ok(FreeParticlePoint {
        theta_gamma,
        cutoff_ratio: f64::INFINITY,
        energy: None,
        specific_heat: c,
    })
}

/// (π/3)θ_γ − (4π³/15)θ_γ³.
pub fn ohmic_low_t_expansion(theta_gamma: f64) -> ExpansionValue {
    let cubic = 4.0 * PI.powi(3) / 15.0 * theta_gamma.powi(3);
    ExpansionValue {
        value: PI / 3.0 * theta_gamma - cubic,
        last_term: cubic,
    }
}

/// z± = (r/4πθ_γ)(1 ± √(1 − 4/r)).
pub fn drude_z_pm(theta_gamma: f64, cutoff_ratio: f64) -> Result<(ComplexValue, ComplexValue)> {
    check_theta(theta_gamma)?;
    check_ratio(cutoff_ratio)?;
    let z0 = cutoff_ratio / (4.0 * PI * theta_gamma);
    let disc = 1.0 - 4.0 / cutoff_ratio;
    if disc < 0.0 {
        let plus = ComplexValue::new(z0, z0 * (-disc).sqrt());
        Ok((plus, plus.conj()))
    } else {
        let plus = z0 * (1.0 + disc.sqrt());
        // z₊z₋ = z0²·4/r
        let minus = z0 * z0 * (4.0 / cutoff_ratio) / plus;
        Ok((ComplexValue::new(plus, 0.0), ComplexValue::new(minus, 0.0)))
    }
}

fn h(z: ComplexValue) -> Result<ComplexValue> {
    Ok(z * trigamma(z + 1.0)?)
}

/// ψ″(x) by a five-point difference of ψ′.
fn tetragamma(x: f64) -> Result<f64> {
    let step = 1e-3 * x.abs().max(1.0);
    let t = |k: f64| -> Result<f64> { Ok(trigamma(ComplexValue::new(x + k * step, 0.0))?.re) };
    Ok((8.0 * (t(1.0)? - t(-1.0)?) - (t(2.0)? - t(-2.0)?)) / (12.0 * step))
}

/// Drude specific heat before discarding the imaginary part.
pub fn drude_specific_heat_complex(theta_gamma: f64, cutoff_ratio: f64) -> Result<ComplexValue> {
    check_theta(theta_gamma)?;
    check_ratio(cutoff_ratio)?;
    let a = 1.0 / (2.0 * PI * theta_gamma);
    let disc = 1.0 - 4.0 / cutoff_ratio;
    if disc.abs() < DEGENERATE_WIDTH {
        // [h(z₀(1+s)) − h(z₀(1−s))]/s → 2z₀h′(z₀)
        let z0 = cutoff_ratio / (4.0 * PI * theta_gamma);
        let dh = trigamma(ComplexValue::new(1.0 + z0, 0.0))?.re + z0 * tetragamma(1.0 + z0)?;
        return Ok(ComplexValue::new(0.5 - a * 2.0 * z0 * dh, 0.0));
    }
    let (zp, zm) = drude_z_pm(theta_gamma, cutoff_ratio)?;
    let s = ComplexValue::new(disc, 0.0).sqrt();
    Ok(0.5 - a / s * (h(zp)? - h(zm)?))
}

/// C/k_B = 1/2 − (a/√(1 − 4/r))[z₊ψ′(1+z₊) − z₋ψ′(1+z₋)].
///
/// An infinite `cutoff_ratio` gives [`ohmic_specific_heat`]; at r = 4 the
/// removable singularity is replaced by its limit.
pub fn drude_specific_heat(theta_gamma: f64, cutoff_ratio: f64) -> Result<FreeParticlePoint> {
    if cutoff_ratio.is_infinite() && cutoff_ratio > 0.0 {
        return ohmic_specific_heat(theta_gamma);
    }
    let c = drude_specific_heat_complex(theta_gamma, cutoff_ratio)?;
    Ok(FreeParticlePoint {
        theta_gamma,
        cutoff_ratio,
        energy: None,
        specific_heat: c.re,
    })
}

/// ⟨E⟩ = (1/2β)[1 + 2Σ νγ̂(ν)/(ν² + νγ̂(ν))] at k_B T = `theta`, with
/// frequencies in the units of `kernel`.
///
/// For strict ohmic damping the value carries an arbitrary
/// temperature-independent offset and `regularized` is set.
pub fn free_energy_internal(theta: f64, kernel: &DampingKernel, tol: f64) -> Result<SumResult> {
    check_theta(theta)?;
    energy_sum_regularized(System::FreeParticle, kernel, 1.0 / theta, PrescriptionTag::EnergyRoute, tol)
}
