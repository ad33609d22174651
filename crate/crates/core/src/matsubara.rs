//! Damping kernels, Matsubara-sum energies for both prescriptions, and
//! numerical specific heats.
//!
//! With ν_n = 2πn/β the two energies are
//!
//! ```text
//! ⟨E⟩   = (1/β)[c + Σ (2ω₀² + νγ̂(ν))            / (ν² + νγ̂(ν) + ω₀²)]
//! ⟨E⟩_Z = (1/β)[c + Σ (2ω₀² + νγ̂(ν) − ν²γ̂′(ν)) / (ν² + νγ̂(ν) + ω₀²)]
//! ```
//!
//! with c = 1 for the oscillator and c = 1/2 for the free particle. All
//! frequencies and β must be given in one consistent unit; the oscillator
//! helpers use ω₀ = 1, the free-particle helpers γ = 1.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::quadrature::integrate_to_infinity;
use crate::PrescriptionTag;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Hard cap on directly summed terms.
pub const MAX_TERMS: u64 = 100_000_000;

const MIN_TERMS: u64 = 64;

/// Laplace transform γ̂(z) of the damping kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DampingKernel {
    /// γ̂(z) = γ.
    Ohmic { gamma: f64 },
    /// γ̂(z) = γω_D/(z + ω_D).
    Drude { gamma: f64, omega_d: f64 },
}

impl DampingKernel {
    pub fn ohmic(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(domain(format!("gamma must be non-negative, got {gamma}")));
        }
        Ok(DampingKernel::Ohmic { gamma })
    }

    /// An infinite `omega_d` yields the ohmic kernel.
    pub fn drude(gamma: f64, omega_d: f64) -> Result<Self> {
        if omega_d.is_infinite() && omega_d > 0.0 {
            return Self::ohmic(gamma);
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(domain(format!("gamma must be non-negative, got {gamma}")));
        }
        if !(omega_d.is_finite() && omega_d > 0.0) {
            return Err(domain(format!("omega_D must be positive, got {omega_d}")));
        }
        Ok(DampingKernel::Drude { gamma, omega_d })
    }

    pub fn gamma(&self) -> f64 {
        match *self {
            DampingKernel::Ohmic { gamma } | DampingKernel::Drude { gamma, .. } => gamma,
        }
    }

    pub fn is_ohmic(&self) -> bool {
        matches!(self, DampingKernel::Ohmic { .. })
    }

    fn omega_d(&self) -> Option<f64> {
        match *self {
            DampingKernel::Ohmic { .. } => None,
            DampingKernel::Drude { omega_d, .. } => Some(omega_d),
        }
    }

    fn eval(&self, z: f64) -> (f64, f64) {
        match *self {
            DampingKernel::Ohmic { gamma } => (gamma, 0.0),
            DampingKernel::Drude { gamma, omega_d } => {
                let d = z + omega_d;
                (gamma * omega_d / d, -gamma * omega_d / (d * d))
            }
        }
    }

    /// (γ̂(z), γ̂′(z)) for z > 0.
    pub fn laplace(&self, z: f64) -> Result<(f64, f64)> {
        if !(z > 0.0) {
            return Err(domain(format!("kernel argument must be positive, got {z}")));
        }
        Ok(self.eval(z))
    }
}

/// Free function form of [`DampingKernel::laplace`].
pub fn kernel_laplace(kernel: &DampingKernel, z: f64) -> Result<(f64, f64)> {
    kernel.laplace(z)
}

/// The system coupled to the bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum System {
    Oscillator { omega0: f64 },
    FreeParticle,
}

impl System {
    fn omega0(&self) -> f64 {
        match *self {
            System::Oscillator { omega0 } => omega0,
            System::FreeParticle => 0.0,
        }
    }

    /// Zero-frequency contribution in units of 1/β.
    fn lead(&self) -> f64 {
        match self {
            System::Oscillator { .. } => 1.0,
            System::FreeParticle => 0.5,
        }
    }
}

/// A tail-controlled Matsubara sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumResult {
    pub value: f64,
    pub terms_used: u64,
    /// Estimated absolute error of `value`.
    pub tail_bound: f64,
    pub route: PrescriptionTag,
    /// True when a temperature-independent divergent constant was removed.
    pub regularized: bool,
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
struct Accumulator {
    sum: f64,
    comp: f64,
    abs: f64,
}

impl Accumulator {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs += x.abs();
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

struct Series {
    value: f64,
    terms: u64,
    bound: f64,
}

/// Σ_{n≥1} f(n) for a summand analytic in Re n > 0 and decaying like 1/n².
///
/// Terms are added directly up to N; the rest is the Euler–Maclaurin tail
/// ∫_N^∞ f − f(N)/2 − f′(N)/12 + f‴(N)/720, with the integral done by
/// quadrature. `offset` is added to the partial sum before the relative
/// tolerance test. N doubles until the truncation error meets `rel_tol` or
/// falls below the accumulated rounding error.
fn sum_with_tail<F: Fn(f64) -> f64>(f: F, n_start: u64, offset: f64, rel_tol: f64) -> Result<Series> {
    let mut acc = Accumulator::default();
    let mut n_done = 0u64;
    let mut n_target = n_start.max(MIN_TERMS);
    loop {
        for n in (n_done + 1)..=n_target {
            acc.add(f(n as f64));
        }
        n_done = n_target;
        let nf = n_target as f64;
        let f_n = f(nf);

        let h1 = 0.01 * nf;
        let d1 = (8.0 * (f(nf + h1) - f(nf - h1)) - (f(nf + 2.0 * h1) - f(nf - 2.0 * h1))) / (12.0 * h1);
        let h3 = 0.05 * nf;
        let d3 = (f(nf + 2.0 * h3) - 2.0 * f(nf + h3) + 2.0 * f(nf - h3) - f(nf - 2.0 * h3)) / (2.0 * h3.powi(3));

        let scale = (offset + acc.value()).abs().max(f64::MIN_POSITIVE);
        let integral = integrate_to_infinity(&f, nf, 0.1 * rel_tol * scale, 1e-14)?;
        let em3 = d3 / 720.0;
        let tail = integral.value - 0.5 * f_n - d1 / 12.0 + em3;
        let value = acc.value() + tail;
        let rounding = 4.0 * f64::EPSILON * (acc.abs + tail.abs());
        let truncation = em3.abs() + integral.abs_err;
        let bound = truncation + rounding;

        // once truncation is below the rounding level more terms cannot help
        if truncation <= (rel_tol * (offset + value).abs()).max(rounding) {
            return Ok(Series {
                value,
                terms: n_done,
                bound,
            });
        }
        if n_target >= MAX_TERMS {
            return Err(Error::Convergence {
                terms: n_done,
                achieved: bound,
            });
        }
        n_target = (2 * n_target).min(MAX_TERMS);
    }
}

fn check_beta(beta: f64, tol: f64) -> Result<()> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(domain(format!("beta must be positive and finite, got {beta}")));
    }
    if !(tol > 0.0) {
        return Err(domain("tolerance must be positive"));
    }
    Ok(())
}

fn check_system(system: &System) -> Result<()> {
    let w0 = system.omega0();
    if let System::Oscillator { .. } = system {
        if !(w0.is_finite() && w0 > 0.0) {
            return Err(domain(format!("omega0 must be positive, got {w0}")));
        }
    }
    Ok(())
}

/// Index beyond which all summands are in their asymptotic regime.
fn start_index(system: &System, kernel: &DampingKernel, beta: f64) -> u64 {
    let fmax = system.omega0().max(kernel.gamma()).max(kernel.omega_d().unwrap_or(0.0));
    let n = 4.0 * beta * fmax / (2.0 * PI);
    // direct summation beyond ~1e6 terms is left to the quadrature tail
    n.clamp(MIN_TERMS as f64, 1.0e6) as u64
}

fn summand(system: &System, kernel: &DampingKernel, beta: f64, route: PrescriptionTag) -> impl Fn(f64) -> f64 {
    let w0sq = system.omega0().powi(2);
    let kernel = *kernel;
    let partition = route == PrescriptionTag::PartitionRoute;
    move |n: f64| {
        let nu = 2.0 * PI * n / beta;
        let (g, gp) = kernel.eval(nu);
        let mut num = 2.0 * w0sq + nu * g;
        if partition {
            num -= nu * nu * gp;
        }
        num / (nu * nu + nu * g + w0sq)
    }
}

fn sum_energy(
    system: &System,
    kernel: &DampingKernel,
    beta: f64,
    route: PrescriptionTag,
    tol: f64,
    regularize: bool,
) -> Result<SumResult> {
    check_system(system)?;
    check_beta(beta, tol)?;
    let lead = system.lead();
    let n0 = start_index(system, kernel, beta);
    let (series, extra) = if regularize {
        // Σ (f_n − γ/ν_n); the subtracted harmonic series is reinstated as
        // (γ/2π)(γ_E + ln(β/2π)), which is its β-dependence with a
        // frequency cutoff once the cutoff-dependent constant is dropped.
        let gamma = kernel.gamma();
        let w0sq = system.omega0().powi(2);
        let f = move |n: f64| {
            let nu = 2.0 * PI * n / beta;
            (w0sq * (2.0 * nu - gamma) - gamma * gamma * nu) / (nu * (nu * nu + nu * gamma + w0sq))
        };
        let extra = gamma / (2.0 * PI) * (EULER_GAMMA + (beta / (2.0 * PI)).ln());
        (sum_with_tail(f, n0, lead + beta * extra, tol)?, extra)
    } else {
        let f = summand(system, kernel, beta, route);
        (sum_with_tail(f, n0, lead, tol)?, 0.0)
    };
    Ok(SumResult {
        value: (lead + series.value) / beta + extra,
        terms_used: series.terms,
        tail_bound: series.bound / beta,
        route,
        regularized: regularize,
    })
}

fn is_divergent(kernel: &DampingKernel) -> bool {
    kernel.is_ohmic() && kernel.gamma() > 0.0
}

/// Absolute energy for either prescription.
///
/// Strict ohmic damping with γ > 0 makes both sums diverge logarithmically
/// (the momentum variance needs a frequency cutoff); that case returns
/// [`Error::Divergent`] and must go through [`energy_sum_regularized`].
pub fn energy_sum(
    system: System,
    kernel: &DampingKernel,
    beta: f64,
    route: PrescriptionTag,
    tol: f64,
) -> Result<SumResult> {
    if is_divergent(kernel) {
        let what = match system {
            System::FreeParticle => "free particle",
            System::Oscillator { .. } => "oscillator",
        };
        return Err(Error::Divergent(format!(
            "{what} energy diverges for strict ohmic damping; use the regularized sum for temperature derivatives"
        )));
    }
    sum_energy(&system, kernel, beta, route, tol, false)
}

/// Energy with the temperature-independent ohmic divergence removed.
/// Identical to [`energy_sum`] for kernels where that converges.
pub fn energy_sum_regularized(
    system: System,
    kernel: &DampingKernel,
    beta: f64,
    route: PrescriptionTag,
    tol: f64,
) -> Result<SumResult> {
    let regularize = is_divergent(kernel);
    sum_energy(&system, kernel, beta, route, tol, regularize)
}

/// ⟨E⟩_Z − ⟨E⟩ = (1/β)Σ −ν²γ̂′(ν)/(ν² + νγ̂(ν) + ω₀²), summed directly.
pub fn prescription_gap(system: System, kernel: &DampingKernel, beta: f64, tol: f64) -> Result<SumResult> {
    check_system(&system)?;
    check_beta(beta, tol)?;
    let done = |value, terms, tail_bound| SumResult {
        value,
        terms_used: terms,
        tail_bound,
        route: PrescriptionTag::PartitionRoute,
        regularized: false,
    };
    if kernel.is_ohmic() {
        return Ok(done(0.0, 0, 0.0));
    }
    let w0sq = system.omega0().powi(2);
    let k = *kernel;
    let f = move |n: f64| {
        let nu = 2.0 * PI * n / beta;
        let (g, gp) = k.eval(nu);
        -nu * nu * gp / (nu * nu + nu * g + w0sq)
    };
    let s = sum_with_tail(f, start_index(&system, kernel, beta), 0.0, tol)?;
    Ok(done(s.value / beta, s.terms, s.bound / beta))
}

/// ⟨q²⟩ = (1/β)[1/ω₀² + 2Σ 1/(ν² + νγ̂(ν) + ω₀²)], the residue form of the
/// n = 0 spectral integral.
pub fn position_variance_sum(omega0: f64, kernel: &DampingKernel, beta: f64, tol: f64) -> Result<SumResult> {
    let system = System::Oscillator { omega0 };
    check_system(&system)?;
    check_beta(beta, tol)?;
    let w0sq = omega0 * omega0;
    let k = *kernel;
    let f = move |n: f64| {
        let nu = 2.0 * PI * n / beta;
        let (g, _) = k.eval(nu);
        2.0 / (nu * nu + nu * g + w0sq)
    };
    let lead = 1.0 / w0sq;
    let s = sum_with_tail(f, start_index(&system, kernel, beta), lead, tol)?;
    Ok(SumResult {
        value: (lead + s.value) / beta,
        terms_used: s.terms,
        tail_bound: s.bound / beta,
        route: PrescriptionTag::EnergyRoute,
        regularized: false,
    })
}

/// A numerical temperature derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdResult {
    /// Central difference at the requested step.
    pub value: f64,
    /// Richardson combination of the steps h and h/2.
    pub extrapolated: f64,
    /// Estimated discretization error of `value`.
    pub error_estimate: f64,
}

/// C = dE/dθ by central differences with relative step `rel_step`.
pub fn specific_heat_fd<F>(energy: F, theta: f64, rel_step: f64) -> Result<FdResult>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(theta.is_finite() && theta > 0.0) {
        return Err(domain(format!("theta must be positive, got {theta}")));
    }
    if !(rel_step > 0.0 && rel_step < 0.5) {
        return Err(domain(format!("relative step must lie in (0, 0.5), got {rel_step}")));
    }
    let central = |h: f64| -> Result<f64> {
        let up = energy(theta * (1.0 + h))?;
        let down = energy(theta * (1.0 - h))?;
        Ok((up - down) / (2.0 * theta * h))
    };
    let d1 = central(rel_step)?;
    let d2 = central(0.5 * rel_step)?;
    Ok(FdResult {
        value: d1,
        extrapolated: (4.0 * d2 - d1) / 3.0,
        error_estimate: 4.0 / 3.0 * (d1 - d2).abs(),
    })
}

/// Oscillator energy at reduced temperature `theta` (ω₀ = 1, γ = alpha,
/// ω_D = alpha·cutoff_ratio), regularized when the kernel is ohmic.
pub fn oscillator_energy(theta: f64, alpha: f64, cutoff_ratio: f64, route: PrescriptionTag, tol: f64) -> Result<SumResult> {
    let kernel = DampingKernel::drude(alpha, alpha * cutoff_ratio)?;
    energy_sum_regularized(System::Oscillator { omega0: 1.0 }, &kernel, 1.0 / theta, route, tol)
}

/// Free-particle energy at `theta_gamma` (γ = 1, ω_D = cutoff_ratio),
/// regularized when the kernel is ohmic.
pub fn free_particle_energy(theta_gamma: f64, cutoff_ratio: f64, route: PrescriptionTag, tol: f64) -> Result<SumResult> {
    let kernel = DampingKernel::drude(1.0, cutoff_ratio)?;
    energy_sum_regularized(System::FreeParticle, &kernel, 1.0 / theta_gamma, route, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillator;
    use PrescriptionTag::{EnergyRoute, PartitionRoute};

    const OSC: System = System::Oscillator { omega0: 1.0 };

    /// Plain truncated sum, no tail handling.
    fn brute<F: Fn(f64) -> f64>(f: F, n: u64) -> f64 {
        let mut acc = Accumulator::default();
        for k in (1..=n).rev() {
            acc.add(f(k as f64));
        }
        acc.value()
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(DampingKernel::ohmic(2.0).unwrap().laplace(5.0).unwrap(), (2.0, 0.0));
        assert_eq!(DampingKernel::drude(2.0, 8.0).unwrap().laplace(8.0).unwrap(), (1.0, -0.0625));
        let (g, gp) = kernel_laplace(&DampingKernel::drude(2.0, 1e9).unwrap(), 5.0).unwrap();
        assert!((g - 2.0).abs() < 1e-8 && gp.abs() < 1e-8);
        assert!(DampingKernel::drude(1.0, 0.0).is_err());
        assert!(DampingKernel::ohmic(-1.0).is_err());
        assert!(DampingKernel::ohmic(1.0).unwrap().laplace(0.0).is_err());
        assert!(DampingKernel::drude(1.0, f64::INFINITY).unwrap().is_ohmic());
    }

    #[test]
    fn undamped_sum_matches_closed_form() {
        let k = DampingKernel::ohmic(0.0).unwrap();
        for theta in [0.05, 0.3, 1.0, 7.0, 50.0] {
            let r = energy_sum(OSC, &k, 1.0 / theta, EnergyRoute, 1e-13).unwrap();
            let e = oscillator::undamped_thermo(theta).unwrap().energy.unwrap();
            assert!((r.value - e).abs() < 1e-10 * e, "theta {theta}: {} vs {e}", r.value);
            assert!(!r.regularized);
        }
    }

    #[test]
    fn ohmic_absolute_energy_is_divergent() {
        let k = DampingKernel::ohmic(1.0).unwrap();
        assert!(matches!(energy_sum(System::FreeParticle, &k, 1.0, EnergyRoute, 1e-12), Err(Error::Divergent(_))));
        assert!(matches!(energy_sum(OSC, &k, 1.0, PartitionRoute, 1e-12), Err(Error::Divergent(_))));
        let r = energy_sum_regularized(System::FreeParticle, &k, 1.0, EnergyRoute, 1e-12).unwrap();
        assert!(r.regularized && r.value.is_finite());
    }

    #[test]
    fn ohmic_routes_identical() {
        let k = DampingKernel::ohmic(1.5).unwrap();
        for beta in [0.1, 1.0, 20.0] {
            let a = energy_sum_regularized(OSC, &k, beta, EnergyRoute, 1e-12).unwrap();
            let b = energy_sum_regularized(OSC, &k, beta, PartitionRoute, 1e-12).unwrap();
            assert_eq!(a.value, b.value);
            assert_eq!(a.terms_used, b.terms_used);
            let g = prescription_gap(OSC, &k, beta, 1e-12).unwrap();
            assert_eq!(g.value, 0.0);
        }
    }

    #[test]
    fn regularized_sum_differs_from_drude_by_a_constant() {
        // E_Drude(β) − E_reg(β) must not depend on β once ω_D ≫ ν_1, γ
        let k = DampingKernel::drude(1.0, 2e4).unwrap();
        let ko = DampingKernel::ohmic(1.0).unwrap();
        let diff = |beta: f64| {
            energy_sum(OSC, &k, beta, EnergyRoute, 1e-13).unwrap().value
                - energy_sum_regularized(OSC, &ko, beta, EnergyRoute, 1e-13).unwrap().value
        };
        let d1 = diff(1.0);
        let d2 = diff(3.0);
        assert!((d1 - d2).abs() < 1e-3, "{d1} vs {d2}");
        assert!((d1 - (2e4f64).ln() / (2.0 * PI)).abs() < 1e-2);
    }

    #[test]
    fn drude_gap_example() {
        let k = DampingKernel::drude(1.0, 10.0).unwrap();
        let gap = prescription_gap(OSC, &k, 1.0, 1e-13).unwrap();
        // 40-digit reference sum
        assert!((gap.value - 0.113_559_424_392_192_258_6).abs() < 1e-13 * 0.11, "{}", gap.value);
        let e = energy_sum(OSC, &k, 1.0, EnergyRoute, 1e-13).unwrap();
        let ez = energy_sum(OSC, &k, 1.0, PartitionRoute, 1e-13).unwrap();
        assert!(((ez.value - e.value) - gap.value).abs() < 1e-12 * gap.value);
        assert!(gap.value > 0.0);
    }

    #[test]
    fn tail_bound_covers_true_remainder() {
        let cases = [
            (OSC, DampingKernel::drude(1.0, 10.0).unwrap(), 1.0),
            (OSC, DampingKernel::drude(0.5, 3.0).unwrap(), 20.0),
            (System::FreeParticle, DampingKernel::drude(1.0, 0.5).unwrap(), 2.0),
        ];
        for (system, kernel, beta) in cases {
            for route in [EnergyRoute, PartitionRoute] {
                let r = energy_sum(system, &kernel, beta, route, 1e-10).unwrap();
                let reference = {
                    let n = (10 * r.terms_used).max(4_000_000);
                    let f = summand(&system, &kernel, beta, route);
                    let direct = brute(&f, n);
                    // leading 1/n² tail beyond 10N
                    let m = n as f64;
                    let tail = f(m) * m - 0.5 * f(m);
                    (system.lead() + direct + tail) / beta
                };
                let err = (r.value - reference).abs();
                assert!(err <= r.tail_bound + 1e-9 * reference.abs(), "{err} vs bound {}", r.tail_bound);
                assert!(r.tail_bound <= 1e-10 * r.value.abs());
            }
        }
    }

    #[test]
    fn euler_maclaurin_against_zeta() {
        // Σ 1/n² = π²/6 and Σ 1/(n² + 1) = (π coth π − 1)/2
        let s = sum_with_tail(|n| 1.0 / (n * n), 64, 0.0, 1e-14).unwrap();
        assert!((s.value - PI * PI / 6.0).abs() < 1e-15);
        let s = sum_with_tail(|n| 1.0 / (n * n + 1.0), 64, 0.0, 1e-14).unwrap();
        assert!((s.value - 0.5 * (PI / PI.tanh() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn position_variance_undamped() {
        let k = DampingKernel::ohmic(0.0).unwrap();
        let r = position_variance_sum(1.0, &k, 1.0, 1e-13).unwrap();
        assert!((r.value - 0.5 / 0.5f64.tanh()).abs() < 1e-12);
    }

    #[test]
    fn fd_examples() {
        let c = specific_heat_fd(|t| Ok(oscillator::undamped_thermo(t)?.energy.unwrap()), 1.0, 1e-5).unwrap();
        assert!((c.value - 0.920_673_594_207_792_3).abs() < 1e-8);
        assert!(c.error_estimate < 1e-8);
        let c = specific_heat_fd(|_| Ok(3.0), 2.0, 1e-5).unwrap();
        assert_eq!(c.value, 0.0);
        assert!(specific_heat_fd(Ok, 0.0, 1e-5).is_err());
        let failing = specific_heat_fd(|_| Err(Error::Divergent("x".into())), 1.0, 1e-5);
        assert!(matches!(failing, Err(Error::Divergent(_))));
    }

    #[test]
    fn ohmic_oscillator_fd_matches_closed_form() {
        for alpha in [0.5, 2.0] {
            for theta in [0.1, 1.0, 10.0] {
                let e = |t: f64| Ok(oscillator_energy(t, alpha, f64::INFINITY, EnergyRoute, 1e-14)?.value);
                let c = specific_heat_fd(e, theta, 1e-4).unwrap().value;
                let exact = oscillator::damped_specific_heat(theta, alpha).unwrap().specific_heat.unwrap();
                assert!((c - exact).abs() < 1e-7, "({theta}, {alpha}): {c} vs {exact}");
            }
        }
    }
}
