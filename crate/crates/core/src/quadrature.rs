//! Adaptive Gauss–Kronrod quadrature and the spectral integrals for the
//! second moments of the ohmically damped oscillator.
//!
//! The moment integrals are
//!
//! ```text
//! f_n(T) = ∫ dω/2π · γ ω^{n+1} / ((ω² − ω₀²)² + γ²ω²) · coth(βω/2)
//! ```
//!
//! and are split with coth(x) = 1 + 2/(e^{2x} − 1). The "1" piece carries
//! no temperature dependence: for n = 0 it is integrated over the whole
//! half line, for n = 2 it diverges logarithmically and is dropped. The
//! Bose piece decays exponentially and is integrated on [0, W] with an
//! analytic bound on the remainder beyond W.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const MAX_PANELS: usize = 4000;

/// An integral value and its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    res_abs: f64,
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut res_abs = kronrod.abs();
    let mut fv = [(0.0, 0.0); 10];
    for (j, node) in XGK.iter().take(10).enumerate() {
        let x = half * node;
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv[j] = (f1, f2);
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for (j, (f1, f2)) in fv.iter().enumerate() {
        res_asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let scale = half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    res_asc *= scale;
    res_abs *= scale;
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        err,
        res_abs,
    }
}

/// Globally adaptive GK21 quadrature of `f` over [a, b].
///
/// `breakpoints` inside (a, b) seed the initial panels; the panel with the
/// largest error is bisected until the total error estimate drops below
/// `max(abs_tol, rel_tol·|I|)` or reaches the rounding floor.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(domain(format!("invalid integration interval [{a}, {b}]")));
    }
    let mut edges = vec![a];
    let mut inner: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(|x, y| x.total_cmp(y));
    inner.dedup();
    edges.extend(inner);
    edges.push(b);

    let mut panels: Vec<Panel> = edges.windows(2).map(|w| gk21(&f, w[0], w[1])).collect();
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.err).sum();
        if !value.is_finite() {
            return Err(domain("integrand produced a non-finite value"));
        }
        // the per-panel error estimate never drops below 50·eps·∫|f|
        let floor = 100.0 * f64::EPSILON * panels.iter().map(|p| p.res_abs).sum::<f64>();
        if err <= abs_tol.max(rel_tol * value.abs()).max(floor) {
            return Ok(QuadResult { value, abs_err: err });
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::Quadrature { achieved: err });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // cannot split further in floating point
            return Err(Error::Quadrature { achieved: err });
        }
        panels.push(gk21(&f, p.a, mid));
        panels.push(gk21(&f, mid, p.b));
    }
}

/// ∫_a^∞ f(x) dx through the substitution x = a/t, valid for a > 0 and f
/// decaying at least as fast as 1/x².
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, abs_tol: f64, rel_tol: f64) -> Result<QuadResult> {
    if !(a > 0.0) {
        return Err(domain("lower limit must be positive"));
    }
    integrate(
        |t: f64| {
            if t <= 0.0 {
                0.0
            } else {
                f(a / t) * a / (t * t)
            }
        },
        0.0,
        1.0,
        &[],
        abs_tol,
        rel_tol,
    )
}

/// Which spectral moment to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentOrder {
    /// n = 0: position variance, convergent.
    Zero,
    /// n = 2: momentum variance, temperature-dependent part only.
    Two,
}

/// Reduced second moments, ⟨q²⟩Mω₀/ħ and ⟨p²⟩/(Mħω₀) with its
/// temperature-independent divergence removed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentResult {
    pub q2: f64,
    pub p2_reg: f64,
    pub abs_err: f64,
}

impl MomentResult {
    /// E = p²/2 + q²/2 in units of ħω₀, up to a temperature-independent
    /// constant.
    pub fn energy(&self) -> f64 {
        0.5 * (self.p2_reg + self.q2)
    }
}

fn lorentz_denominator(w: f64, alpha: f64) -> f64 {
    let d = w * w - 1.0;
    d * d + alpha * alpha * w * w
}

/// f₀ at zero temperature (the coth → 1 piece), in closed form:
/// (1/π)(γ/2)∫₀^∞ du / (u² − (2 − γ²)u + 1).
pub fn vacuum_position_variance(alpha: f64) -> f64 {
    let p = 1.0 - 0.5 * alpha * alpha;
    if alpha < 2.0 {
        let q = 0.5 * alpha * (4.0 - alpha * alpha).sqrt();
        alpha / (2.0 * PI * q) * (0.5 * PI + (p / q).atan())
    } else if alpha == 2.0 {
        // double root at u = −1
        alpha / (2.0 * PI)
    } else {
        // real roots u₁ < u₂ < 0
        let r = 0.5 * alpha * (alpha * alpha - 4.0).sqrt();
        let (u1, u2) = (p - r, p + r);
        alpha / (2.0 * PI) * ((u1 / u2).ln()) / (u2 - u1)
    }
}

fn check(theta: f64, alpha: f64, tol: f64) -> Result<()> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(domain(format!("theta must be positive, got {theta}")));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(domain(format!("alpha must be positive for the spectral integrals, got {alpha}")));
    }
    if !(tol > 0.0) {
        return Err(domain("tolerance must be positive"));
    }
    Ok(())
}

/// Bose-weighted piece (1/π)∫₀^∞ γω^{n+1}·2n_B(ω)/((ω²−1)²+γ²ω²) dω.
fn thermal_part(power: i32, theta: f64, alpha: f64, tol: f64) -> Result<QuadResult> {
    let beta = 1.0 / theta;
    let integrand = |w: f64| {
        if w <= 0.0 {
            return if power == 1 { 2.0 * alpha * theta / PI } else { 0.0 };
        }
        let bose2 = 2.0 / (beta * w).exp_m1();
        alpha * w.powi(power) * bose2 / (PI * lorentz_denominator(w, alpha))
    };
    // For w ≥ 2 max(1, γ): denominator ≥ (3w²/4)², so the integrand is
    // below K w^{power−4} e^{−βw} with K = 32γ/(9π(1 − e^{−βW})).
    let mut w_max = 2.0 * alpha.max(1.0);
    let tail_bound = |w: f64| {
        let k = 32.0 * alpha / (9.0 * PI * -(-beta * w).exp_m1());
        k * w.powi(power - 4) * (-beta * w).exp() / beta
    };
    while tail_bound(w_max) > 0.1 * tol {
        w_max *= 1.5;
    }
    let peaks = [1.0 - alpha, 1.0 - 0.5 * alpha, 1.0, 1.0 + 0.5 * alpha, 1.0 + alpha];
    let mut r = integrate(integrand, 0.0, w_max, &peaks, 0.5 * tol, 0.0)?;
    r.abs_err += tail_bound(w_max);
    Ok(r)
}

/// Spectral moment f_n in reduced units (ω₀ = 1). For n = 0 this is the
/// full integral; for n = 2 only its temperature-dependent part.
pub fn f_n_integral(order: MomentOrder, theta: f64, alpha: f64, tol: f64) -> Result<QuadResult> {
    check(theta, alpha, tol)?;
    match order {
        MomentOrder::Zero => {
            let thermal = thermal_part(1, theta, alpha, tol)?;
            Ok(QuadResult {
                value: vacuum_position_variance(alpha) + thermal.value,
                abs_err: thermal.abs_err,
            })
        }
        MomentOrder::Two => thermal_part(3, theta, alpha, tol),
    }
}

/// Both moments at one temperature.
pub fn moments(theta: f64, alpha: f64, tol: f64) -> Result<MomentResult> {
    let q = f_n_integral(MomentOrder::Zero, theta, alpha, tol)?;
    let p = f_n_integral(MomentOrder::Two, theta, alpha, tol)?;
    Ok(MomentResult {
        q2: q.value,
        p2_reg: p.value,
        abs_err: q.abs_err + p.abs_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk21_is_exact_for_polynomials() {
        for k in 0..=31 {
            let p = gk21(&|x: f64| x.powi(k), 0.0, 1.0);
            let exact = 1.0 / (k as f64 + 1.0);
            assert!((p.value - exact).abs() < 1e-15, "degree {k}: {}", p.value);
        }
        // the embedded Gauss rule alone is exact to degree 19
        let gauss: f64 = XGK
            .iter()
            .take(10)
            .enumerate()
            .filter(|(j, _)| j % 2 == 1)
            .map(|(j, x)| WG[j / 2] * (x.powi(18) + x.powi(18)))
            .sum();
        assert!((gauss - 2.0 / 19.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_sharp_peak_and_tail() {
        let eps = 1e-3;
        let r = integrate(|x: f64| eps / (PI * ((x - 1.0).powi(2) + eps * eps)), -10.0, 10.0, &[1.0], 1e-12, 0.0).unwrap();
        let exact = ((9.0 / eps).atan() + (11.0 / eps).atan()) / PI;
        assert!((r.value - exact).abs() < 1e-11);
        let r = integrate_to_infinity(|x: f64| 1.0 / (1.0 + x * x), 1.0, 1e-13, 0.0).unwrap();
        assert!((r.value - PI / 4.0).abs() < 1e-13);
    }

    #[test]
    fn bad_interval_is_an_error() {
        assert!(integrate(|x| x, 1.0, 0.0, &[], 1e-10, 0.0).is_err());
        assert!(integrate(|x| x, 0.0, f64::INFINITY, &[], 1e-10, 0.0).is_err());
    }

    #[test]
    fn vacuum_variance_matches_quadrature() {
        for alpha in [0.01, 0.5, 1.0, 1.99, 2.0, 2.5, 5.0] {
            let f = |w: f64| alpha * w / (PI * lorentz_denominator(w, alpha));
            let head = integrate(f, 0.0, 4.0, &[1.0 - alpha, 1.0, 1.0 + alpha], 1e-14, 0.0).unwrap();
            let tail = integrate_to_infinity(f, 4.0, 1e-14, 0.0).unwrap();
            let closed = vacuum_position_variance(alpha);
            assert!((head.value + tail.value - closed).abs() < 1e-12, "alpha {alpha}");
        }
        // weak damping recovers the ground-state width 1/2
        assert!((vacuum_position_variance(1e-8) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn weak_damping_recovers_undamped_variance() {
        let r = f_n_integral(MomentOrder::Zero, 1.0, 1e-4, 1e-12).unwrap();
        let undamped = 0.5 / (0.5f64).tanh();
        assert!((r.value - undamped).abs() < 1e-3, "{} vs {undamped}", r.value);
        assert!((undamped - 1.081_976_706_869_326_4).abs() < 1e-15);
    }

    #[test]
    fn classical_limit() {
        for theta in [200.0, 1000.0] {
            let m = moments(theta, 1.0, 1e-9).unwrap();
            assert!((m.q2 / theta - 1.0).abs() < 1e-3);
            assert!(m.q2 > 0.0 && m.p2_reg > 0.0);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(f_n_integral(MomentOrder::Zero, 0.0, 1.0, 1e-10).is_err());
        assert!(f_n_integral(MomentOrder::Zero, 1.0, 0.0, 1e-10).is_err());
        assert!(moments(1.0, 1.0, 0.0).is_err());
    }
}
