//! Harmonic oscillator thermodynamics, undamped and with strict ohmic
//! damping.
//!
//! Reduced units: `theta = k_B T/ħω₀`, `alpha = γ/ω₀`; energies in ħω₀,
//! entropies and specific heats in k_B.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::specfun::{g_func, g_prime, trigamma, ComplexValue};
use crate::PrescriptionTag;

/// One thermodynamic state of the oscillator. Fields an operation does not
/// compute are `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorPoint {
    pub theta: f64,
    pub alpha: f64,
    /// Partition function (undamped only).
    pub partition: Option<f64>,
    pub energy: Option<f64>,
    pub entropy: Option<f64>,
    pub specific_heat: Option<f64>,
    pub route: PrescriptionTag,
}

impl OscillatorPoint {
    fn empty(theta: f64, alpha: f64, route: PrescriptionTag) -> Self {
        Self {
            theta,
            alpha,
            partition: None,
            energy: None,
            entropy: None,
            specific_heat: None,
            route,
        }
    }
}

/// The two roots λ± that enter every damped closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaPair {
    pub plus: ComplexValue,
    pub minus: ComplexValue,
}

impl LambdaPair {
    pub fn sum(&self) -> ComplexValue {
        self.plus + self.minus
    }

    pub fn product(&self) -> ComplexValue {
        self.plus * self.minus
    }

    pub fn is_conjugate_pair(&self) -> bool {
        self.plus.im != 0.0 && self.plus == self.minus.conj()
    }
}

fn check(theta: f64, alpha: f64) -> Result<()> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(domain(format!("theta must be positive and finite, got {theta}")));
    }
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(domain(format!("alpha must be non-negative, got {alpha}")));
    }
    Ok(())
}

/// Closed-form thermodynamics of the uncoupled oscillator.
pub fn undamped_thermo(theta: f64) -> Result<OscillatorPoint> {
    check(theta, 0.0)?;
    let b = 1.0 / theta;
    // 1 − e^{−b}, accurate for small b
    let one_minus = -(-b).exp_m1();
    let partition = (-0.5 * b).exp() / one_minus;
    let energy = 0.5 + 1.0 / b.exp_m1();
    let entropy = b / b.exp_m1() - (-(-b).exp()).ln_1p();
    let c = b * (-0.5 * b).exp() / one_minus;
    Ok(OscillatorPoint {
        partition: Some(partition),
        energy: Some(energy),
        entropy: Some(entropy),
        specific_heat: Some(c * c),
        ..OscillatorPoint::empty(theta, 0.0, PrescriptionTag::EnergyRoute)
    })
}

/// λ± = (1/2πθ)[α/2 ± √((α/2)² − 1)], complex conjugates below critical
/// damping.
pub fn lambda_pm(theta: f64, alpha: f64) -> Result<LambdaPair> {
    check(theta, alpha)?;
    let scale = 1.0 / (2.0 * PI * theta);
    let half = 0.5 * alpha;
    let disc = half * half - 1.0;
    if disc < 0.0 {
        let plus = ComplexValue::new(scale * half, scale * (-disc).sqrt());
        Ok(LambdaPair {
            plus,
            minus: plus.conj(),
        })
    } else {
        let big = half + disc.sqrt();
        Ok(LambdaPair {
            plus: ComplexValue::new(scale * big, 0.0),
            // product is scale², avoids cancellation for strong damping
            minus: ComplexValue::new(scale / big, 0.0),
        })
    }
}

/// Specific heat from the energy route, before discarding the imaginary
/// part (which vanishes for conjugate λ±).
pub fn specific_heat_complex(theta: f64, alpha: f64) -> Result<ComplexValue> {
    let lp = lambda_pm(theta, alpha)?;
    let a = alpha / (2.0 * PI * theta);
    let mut c = ComplexValue::new(1.0 - a, 0.0);
    for l in [lp.plus, lp.minus] {
        c += l * l * trigamma(l + 1.0)?;
    }
    Ok(c)
}

/// C/k_B = 1 − ħβγ/2π + λ₊²ψ′(1+λ₊) + λ₋²ψ′(1+λ₋).
pub fn damped_specific_heat(theta: f64, alpha: f64) -> Result<OscillatorPoint> {
    let c = specific_heat_complex(theta, alpha)?;
    Ok(OscillatorPoint {
        specific_heat: Some(c.re),
        ..OscillatorPoint::empty(theta, alpha, PrescriptionTag::EnergyRoute)
    })
}

/// Entropy from the reduced partition function, before discarding the
/// imaginary part.
pub fn entropy_complex(theta: f64, alpha: f64) -> Result<ComplexValue> {
    let lp = lambda_pm(theta, alpha)?;
    let a = alpha / (2.0 * PI * theta);
    // −ln(ħβω₀) = ln θ
    let s = ComplexValue::new(1.0 + theta.ln() + a, 0.0);
    Ok(s + g_func(lp.plus)? + g_func(lp.minus)?)
}

/// S/k_B = 1 − ln(ħβω₀) + ħβγ/2π + g(λ₊) + g(λ₋).
pub fn damped_entropy(theta: f64, alpha: f64) -> Result<OscillatorPoint> {
    let s = entropy_complex(theta, alpha)?;
    Ok(OscillatorPoint {
        entropy: Some(s.re),
        ..OscillatorPoint::empty(theta, alpha, PrescriptionTag::PartitionRoute)
    })
}

/// C = −β ∂S/∂β, differentiating the entropy analytically. Every term of
/// S is a function of β alone through ln β, a ∝ β and λ± ∝ β.
pub fn specific_heat_via_entropy_complex(theta: f64, alpha: f64) -> Result<ComplexValue> {
    let beta = 1.0 / theta;
    let lp = lambda_pm(theta, alpha)?;
    let a = alpha * beta / (2.0 * PI);
    // ∂/∂β of 1 − ln β + a
    let mut ds_dbeta = ComplexValue::new(-1.0 / beta + a / beta, 0.0);
    for l in [lp.plus, lp.minus] {
        let dl_dbeta = l / beta;
        ds_dbeta += g_prime(l)? * dl_dbeta;
    }
    Ok(-beta * ds_dbeta)
}

pub fn damped_specific_heat_via_entropy(theta: f64, alpha: f64) -> Result<OscillatorPoint> {
    let c = specific_heat_via_entropy_complex(theta, alpha)?;
    Ok(OscillatorPoint {
        specific_heat: Some(c.re),
        ..OscillatorPoint::empty(theta, alpha, PrescriptionTag::PartitionRoute)
    })
}

/// Asymptotic forms of the oscillator specific heat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExpansionKind {
    /// Einstein's (ħω₀/k_BT)² e^{−ħω₀/k_BT}.
    UndampedLowT,
    /// 1 − (1/12)(ħω₀/k_BT)², remainder O(T⁻⁴).
    UndampedHighT,
    /// Linear plus cubic terms in T, remainder O(T⁵).
    DampedLowT,
    /// Through T⁻², remainder O(T⁻³).
    DampedHighT,
}

impl ExpansionKind {
    pub const ALL: [ExpansionKind; 4] = [
        ExpansionKind::UndampedLowT,
        ExpansionKind::UndampedHighT,
        ExpansionKind::DampedLowT,
        ExpansionKind::DampedHighT,
    ];

    /// Power of T in the leading omitted term; `None` for the
    /// non-analytic Einstein form.
    pub fn remainder_order(self) -> Option<i32> {
        match self {
            ExpansionKind::UndampedLowT => None,
            ExpansionKind::UndampedHighT => Some(-4),
            ExpansionKind::DampedLowT => Some(5),
            ExpansionKind::DampedHighT => Some(-3),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ExpansionKind::UndampedLowT => "undamped_lowT",
            ExpansionKind::UndampedHighT => "undamped_highT",
            ExpansionKind::DampedLowT => "damped_lowT",
            ExpansionKind::DampedHighT => "damped_highT",
        }
    }
}

/// A truncated series and the magnitude of its last retained term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionValue {
    pub value: f64,
    pub last_term: f64,
}

/// Evaluates a truncated expansion of C. `alpha` is ignored by the
/// undamped kinds. No regime check is made; use `last_term` to judge.
pub fn oscillator_expansion(kind: ExpansionKind, theta: f64, alpha: f64) -> ExpansionValue {
    match kind {
        ExpansionKind::UndampedLowT => {
            let b = 1.0 / theta;
            let value = b * b * (-b).exp();
            ExpansionValue {
                value,
                last_term: value,
            }
        }
        ExpansionKind::UndampedHighT => {
            let t = 1.0 / (12.0 * theta * theta);
            ExpansionValue {
                value: 1.0 - t,
                last_term: t,
            }
        }
        ExpansionKind::DampedLowT => {
            let linear = PI / 3.0 * alpha * theta;
            let cubic = 4.0 * PI.powi(3) / 15.0 * alpha * (3.0 - alpha * alpha) * theta.powi(3);
            ExpansionValue {
                value: linear + cubic,
                last_term: cubic.abs(),
            }
        }
        ExpansionKind::DampedHighT => {
            let first = alpha / (2.0 * PI * theta);
            let second = (alpha * alpha - 2.0) / (24.0 * theta * theta);
            ExpansionValue {
                value: 1.0 - first + second,
                last_term: second.abs(),
            }
        }
    }
}
