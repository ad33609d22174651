//! Gamma-family functions of a complex argument.
//!
//! ln Γ, ψ and ψ′ are evaluated from their Stirling-type asymptotic series
//! once Re(w) ≥ 10; smaller arguments are pushed up with the recurrences
//!
//! ```text
//! ln Γ(z) = ln Γ(z + 1) − ln z
//! ψ(z)    = ψ(z + 1) − 1/z
//! ψ′(z)   = ψ′(z + 1) + 1/z²
//! ```
//!
//! Ten Bernoulli terms keep the truncation error below 1e-16 relative in the
//! right half plane beyond the shift threshold.

use num_complex::Complex64;

use crate::error::{domain, Error, Result};

/// Complex number used for λ±, z± and all gamma-family values.
pub type ComplexValue = Complex64;

const SHIFT_THRESHOLD: f64 = 10.0;

/// Most negative real part accepted; further left the upward recurrence
/// loses too many digits to cancellation.
const MIN_REAL_PART: f64 = -1.0e4;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// B_2, B_4, ..., B_20.
const BERNOULLI: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

fn check_argument(z: ComplexValue) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(domain(format!("non-finite argument {z}")));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0 {
        return Err(Error::Pole(z.re as i64));
    }
    if z.re < MIN_REAL_PART {
        return Err(domain(format!("real part {} below supported range", z.re)));
    }
    Ok(())
}

fn finite(value: ComplexValue, z: ComplexValue) -> Result<ComplexValue> {
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(domain(format!("overflow evaluating at {z}")))
    }
}

fn shift_count(z: ComplexValue) -> usize {
    if z.re >= SHIFT_THRESHOLD {
        0
    } else {
        (SHIFT_THRESHOLD - z.re).ceil() as usize
    }
}

/// Principal branch of ln Γ(z), continuous off the negative real axis.
pub fn ln_gamma(z: ComplexValue) -> Result<ComplexValue> {
    check_argument(z)?;
    if z.im == 0.0 && (z.re == 1.0 || z.re == 2.0) {
        return Ok(ComplexValue::new(0.0, 0.0));
    }
    let n = shift_count(z);
    let mut correction = ComplexValue::new(0.0, 0.0);
    for k in 0..n {
        correction += (z + k as f64).ln();
    }
    let w = z + n as f64;
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = ComplexValue::new(0.0, 0.0);
    let mut power = inv;
    for (k, b) in BERNOULLI.iter().enumerate() {
        let m = 2.0 * (k + 1) as f64;
        series += power * (b / (m * (m - 1.0)));
        power *= inv2;
    }
    let value = (w - 0.5) * w.ln() - w + HALF_LN_2PI + series - correction;
    finite(value, z)
}

/// Digamma ψ(z) = Γ′(z)/Γ(z).
pub fn digamma(z: ComplexValue) -> Result<ComplexValue> {
    check_argument(z)?;
    let n = shift_count(z);
    let mut correction = ComplexValue::new(0.0, 0.0);
    for k in 0..n {
        correction += (z + k as f64).inv();
    }
    let w = z + n as f64;
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = ComplexValue::new(0.0, 0.0);
    let mut power = inv2;
    for (k, b) in BERNOULLI.iter().enumerate() {
        let m = 2.0 * (k + 1) as f64;
        series += power * (b / m);
        power *= inv2;
    }
    let value = w.ln() - inv * 0.5 - series - correction;
    finite(value, z)
}

/// Trigamma ψ′(z).
pub fn trigamma(z: ComplexValue) -> Result<ComplexValue> {
    check_argument(z)?;
    let n = shift_count(z);
    let mut correction = ComplexValue::new(0.0, 0.0);
    for k in 0..n {
        let r = (z + k as f64).inv();
        correction += r * r;
    }
    let w = z + n as f64;
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = ComplexValue::new(0.0, 0.0);
    let mut power = inv2 * inv;
    for b in BERNOULLI {
        series += power * b;
        power *= inv2;
    }
    let value = inv + inv2 * 0.5 + series + correction;
    finite(value, z)
}

/// g(z) = ln Γ(1 + z) − z ψ(1 + z), the building block of the damped
/// oscillator entropy.
pub fn g_func(z: ComplexValue) -> Result<ComplexValue> {
    if z == ComplexValue::new(0.0, 0.0) {
        return Ok(z);
    }
    let w = z + 1.0;
    Ok(ln_gamma(w)? - z * digamma(w)?)
}

/// dg/dz = −z ψ′(1 + z).
pub fn g_prime(z: ComplexValue) -> Result<ComplexValue> {
    Ok(-z * trigamma(z + 1.0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    fn c(re: f64, im: f64) -> ComplexValue {
        ComplexValue::new(re, im)
    }

    fn rel(a: ComplexValue, b: ComplexValue) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    /// Brute-force ψ′ oracle: Σ 1/(z+k)² for k < K plus the
    /// Euler–Maclaurin tail 1/w + 1/(2w²) + 1/(6w³) − 1/(30w⁵) at w = z+K.
    fn trigamma_brute(z: ComplexValue) -> ComplexValue {
        let k_max = 200_000;
        let mut s = c(0.0, 0.0);
        for k in (0..k_max).rev() {
            let r = (z + k as f64).inv();
            s += r * r;
        }
        let w = (z + k_max as f64).inv();
        s + w + w * w * 0.5 + w.powi(3) / 6.0 - w.powi(5) / 30.0
    }

    #[test]
    fn ln_gamma_known_values() {
        assert_eq!(ln_gamma(c(1.0, 0.0)).unwrap(), c(0.0, 0.0));
        let half = ln_gamma(c(0.5, 0.0)).unwrap();
        assert!(rel(half, c(0.5 * PI.ln(), 0.0)) < 1e-13);
        // 40-digit reference evaluation
        let v = ln_gamma(c(3.7, 2.1)).unwrap();
        let expected = c(0.785_346_958_073_822_388_8, 2.583_012_925_115_262_248_6);
        assert!(rel(v, expected) < 1e-13, "{v}");
        // ln Γ(11) = ln 10!
        assert!(rel(ln_gamma(c(11.0, 0.0)).unwrap(), c(3_628_800f64.ln(), 0.0)) < 1e-15);
    }

    #[test]
    fn digamma_known_values() {
        assert!(rel(digamma(c(1.0, 0.0)).unwrap(), c(-EULER_GAMMA, 0.0)) < 1e-14);
        assert!(rel(digamma(c(2.0, 0.0)).unwrap(), c(1.0 - EULER_GAMMA, 0.0)) < 1e-14);
        let v = digamma(c(0.5, 5.0)).unwrap();
        let expected = c(1.607_759_321_607_187_866_1, 1.570_796_326_794_825_270_5);
        assert!(rel(v, expected) < 1e-13, "{v}");
    }

    #[test]
    fn trigamma_known_values() {
        assert!(rel(trigamma(c(1.0, 0.0)).unwrap(), c(PI * PI / 6.0, 0.0)) < 1e-14);
        assert!(rel(trigamma(c(0.5, 0.0)).unwrap(), c(PI * PI / 2.0, 0.0)) < 1e-14);
        assert!(rel(trigamma(c(2.0, 0.0)).unwrap(), c(PI * PI / 6.0 - 1.0, 0.0)) < 1e-14);
    }

    #[test]
    fn trigamma_matches_brute_force() {
        for z in [c(0.3, 0.0), c(1.0, 7.5), c(4.2, -0.9), c(25.0, 40.0), c(-2.5, 0.5)] {
            let v = trigamma(z).unwrap();
            let b = trigamma_brute(z);
            assert!(rel(v, b) < 1e-12, "z = {z}: {v} vs {b}");
        }
    }

    #[test]
    fn g_known_values() {
        assert_eq!(g_func(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert!(rel(g_func(c(1.0, 0.0)).unwrap(), c(EULER_GAMMA - 1.0, 0.0)) < 1e-14);
        let g10 = g_func(c(10.0, 0.0)).unwrap();
        assert!(rel(g10, c(-8.413_113_317_591_695_781_2, 0.0)) < 1e-13);
        let stirling = -10.0 + 0.5 * (2.0 * PI * 10.0).ln() - 0.5;
        assert!((g10.re - stirling).abs() < 2e-2);
        assert!(((g10.re - stirling) / stirling).abs() < 3e-3);
    }

    #[test]
    fn g_prime_matches_finite_difference() {
        for z in [c(0.4, 0.0), c(3.0, 2.0), c(0.1, -6.0)] {
            let h = 1e-5;
            let fd = (g_func(z + h).unwrap() - g_func(z - h).unwrap()) / (2.0 * h);
            assert!((fd - g_prime(z).unwrap()).norm() < 1e-8);
        }
    }

    #[test]
    fn poles_are_errors() {
        assert_eq!(ln_gamma(c(0.0, 0.0)), Err(Error::Pole(0)));
        assert_eq!(digamma(c(-3.0, 0.0)), Err(Error::Pole(-3)));
        assert_eq!(trigamma(c(-7.0, 0.0)), Err(Error::Pole(-7)));
        assert_eq!(g_func(c(-1.0, 0.0)), Err(Error::Pole(0)));
        assert!(matches!(digamma(c(f64::NAN, 0.0)), Err(Error::Domain(_))));
        // just off the pole is fine
        assert!(trigamma(c(-3.0, 1e-3)).is_ok());
    }

    #[test]
    fn trigamma_reflection_on_unit_interval() {
        for i in 1..20 {
            let x = i as f64 / 20.0;
            let lhs = trigamma(c(x, 0.0)).unwrap() + trigamma(c(1.0 - x, 0.0)).unwrap();
            let rhs = PI * PI / (PI * x).sin().powi(2);
            assert!((lhs.re - rhs).abs() / rhs < 1e-11);
        }
    }

    #[test]
    fn digamma_is_derivative_of_ln_gamma() {
        for z in [c(0.7, 0.0), c(2.5, 3.5), c(12.0, -4.0)] {
            let h = 1e-5;
            let fd = (ln_gamma(z + h).unwrap() - ln_gamma(z - h).unwrap()) / (2.0 * h);
            assert!((fd - digamma(z).unwrap()).norm() < 1e-6);
        }
    }

    fn arb_z() -> impl Strategy<Value = ComplexValue> {
        (0.05f64..30.0, -30.0f64..30.0).prop_map(|(re, im)| c(re, im))
    }

    proptest! {
        #[test]
        fn conjugation_symmetry(z in arb_z()) {
            prop_assert!((ln_gamma(z.conj()).unwrap() - ln_gamma(z).unwrap().conj()).norm() < 1e-13);
            prop_assert!((digamma(z.conj()).unwrap() - digamma(z).unwrap().conj()).norm() < 1e-13);
            prop_assert!((trigamma(z.conj()).unwrap() - trigamma(z).unwrap().conj()).norm() < 1e-13);
            prop_assert!((g_func(z.conj()).unwrap() - g_func(z).unwrap().conj()).norm() < 1e-13);
        }

        #[test]
        fn recurrences(z in arb_z()) {
            let d = digamma(z + 1.0).unwrap() - digamma(z).unwrap() - z.inv();
            prop_assert!(d.norm() < 1e-13 * (1.0 + digamma(z).unwrap().norm()));
            let t = trigamma(z + 1.0).unwrap() - trigamma(z).unwrap() + z.inv() * z.inv();
            prop_assert!(t.norm() < 1e-13 * (1.0 + trigamma(z).unwrap().norm()));
            let l = ln_gamma(z + 1.0).unwrap() - ln_gamma(z).unwrap() - z.ln();
            let wrapped = c(l.re, l.im - (l.im / (2.0 * PI)).round() * 2.0 * PI);
            prop_assert!(wrapped.norm() < 1e-13 * (1.0 + ln_gamma(z).unwrap().norm()));
        }
    }
}
