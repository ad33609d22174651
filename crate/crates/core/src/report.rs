//! Tabulated curves and reports behind the command-line tool.
//!
//! Every builder evaluates its grid in parallel and returns rows in grid
//! order, so output does not depend on the number of threads.

use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::free_particle::{drude_specific_heat, ohmic_low_t_expansion};
use crate::matsubara::{
    free_particle_energy, oscillator_energy, prescription_gap, specific_heat_fd, DampingKernel, System,
};
use crate::oscillator::{
    damped_entropy, damped_specific_heat, damped_specific_heat_via_entropy, oscillator_expansion, undamped_thermo,
    ExpansionKind,
};
use crate::units::{ReducedParams, Tolerances};
use crate::PrescriptionTag;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Cutoff ratios of the `fig1` inset, from the upper to the lower curve.
pub const FIG1_RATIOS: [f64; 4] = [0.01, 0.1, 1.0, f64::INFINITY];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Oscillator,
    Free,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Oscillator => "oscillator",
            Model::Free => "free",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteSelection {
    Energy,
    Partition,
    Both,
}

impl RouteSelection {
    pub fn routes(self) -> &'static [PrescriptionTag] {
        use PrescriptionTag::*;
        match self {
            RouteSelection::Energy => &[EnergyRoute],
            RouteSelection::Partition => &[PartitionRoute],
            RouteSelection::Both => &[EnergyRoute, PartitionRoute],
        }
    }

    fn name(self) -> &'static str {
        match self {
            RouteSelection::Energy => "energy",
            RouteSelection::Partition => "partition",
            RouteSelection::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    E,
    S,
    C,
}

/// Reduced-temperature grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub log: bool,
}

impl Grid {
    pub fn new(t_min: f64, t_max: f64, points: usize, log: bool) -> Result<Self> {
        if !(t_min.is_finite() && t_max.is_finite() && t_min > 0.0 && t_min < t_max) {
            return Err(domain(format!("need 0 < tmin < tmax, got [{t_min}, {t_max}]")));
        }
        if points < 2 {
            return Err(domain(format!("need at least 2 grid points, got {points}")));
        }
        Ok(Self {
            t_min,
            t_max,
            points,
            log,
        })
    }

    /// Grid values; the end points are exact.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    self.t_min
                } else if i == self.points - 1 {
                    self.t_max
                } else if self.log {
                    let (a, b) = (self.t_min.ln(), self.t_max.ln());
                    (a + (b - a) * i as f64 / last).exp()
                } else {
                    self.t_min + (self.t_max - self.t_min) * i as f64 / last
                }
            })
            .collect()
    }
}

/// Everything needed to tabulate one curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    pub model: Model,
    /// γ/ω₀; ignored for the free particle.
    pub alpha: f64,
    /// ω_D/γ, infinite for strict ohmic damping.
    pub cutoff_ratio: f64,
    pub grid: Grid,
    pub route: RouteSelection,
    pub quantities: Vec<Quantity>,
}

impl CurveSpec {
    pub fn validate(&self) -> Result<()> {
        self.params(self.grid.t_min)?;
        if self.quantities.is_empty() {
            return Err(domain("no quantities requested"));
        }
        if self.quantities.contains(&Quantity::S) {
            if self.model == Model::Free {
                return Err(domain("entropy is only available for the oscillator"));
            }
            if self.cutoff_ratio.is_finite() {
                return Err(domain("entropy is only available for strict ohmic damping"));
            }
        }
        if self.model == Model::Oscillator && self.cutoff_ratio.is_finite() && self.alpha == 0.0 {
            return Err(domain("a Drude kernel needs alpha > 0"));
        }
        Ok(())
    }

    fn params(&self, theta: f64) -> Result<ReducedParams> {
        match self.model {
            Model::Oscillator => ReducedParams::oscillator(theta, self.alpha, self.cutoff_ratio),
            Model::Free => ReducedParams::free_particle(theta, self.cutoff_ratio),
        }
    }

    fn kernel_name(&self) -> &'static str {
        if self.cutoff_ratio.is_infinite() {
            "ohmic"
        } else {
            "drude"
        }
    }

    /// True when the tabulated energies carry an arbitrary constant offset.
    pub fn energy_regularized(&self) -> bool {
        self.cutoff_ratio.is_infinite() && (self.model == Model::Free || self.alpha > 0.0)
    }

    fn columns(&self) -> Vec<String> {
        let mut cols = vec!["theta".to_string()];
        for q in [Quantity::C, Quantity::S, Quantity::E] {
            if !self.quantities.contains(&q) {
                continue;
            }
            match q {
                Quantity::S => cols.push("S".into()),
                Quantity::C | Quantity::E => {
                    let tag = if q == Quantity::C { "C" } else { "E" };
                    for r in self.route.routes() {
                        cols.push(format!("{tag}_{}", r.as_str()));
                    }
                }
            }
        }
        cols
    }
}

/// A numeric table with a header and one parameter comment line.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub comment: String,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", self.header.join(","))?;
        writeln!(out, "# {}", self.comment)?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_value(*v)).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// 17 significant digits, exact on read-back.
pub fn format_value(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// A grid point whose evaluation failed.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFailure {
    pub theta: f64,
    pub error: Error,
}

impl fmt::Display for PointFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at theta = {}: {}", self.theta, self.error)
    }
}

fn evaluate_grid<T, F>(thetas: &[f64], f: F) -> std::result::Result<Vec<T>, PointFailure>
where
    T: Send,
    F: Fn(f64) -> Result<T> + Sync,
{
    let results: Vec<Result<T>> = thetas.par_iter().map(|&t| f(t)).collect();
    results
        .into_iter()
        .zip(thetas)
        .map(|(r, &theta)| r.map_err(|error| PointFailure { theta, error }))
        .collect()
}

fn fmt_ratio(r: f64) -> String {
    if r.is_infinite() {
        "inf".into()
    } else {
        r.to_string()
    }
}

/// Reduced energy along one route; regularized for strict ohmic damping.
pub fn model_energy(model: Model, theta: f64, alpha: f64, cutoff_ratio: f64, route: PrescriptionTag, tol: f64) -> Result<f64> {
    match model {
        Model::Oscillator if alpha == 0.0 => Ok(undamped_thermo(theta)?.energy.unwrap_or(f64::NAN)),
        Model::Oscillator => Ok(oscillator_energy(theta, alpha, cutoff_ratio, route, tol)?.value),
        Model::Free => Ok(free_particle_energy(theta, cutoff_ratio, route, tol)?.value),
    }
}

/// Specific heat by differentiating [`model_energy`].
pub fn model_specific_heat_fd(
    model: Model,
    theta: f64,
    alpha: f64,
    cutoff_ratio: f64,
    route: PrescriptionTag,
    tol: &Tolerances,
) -> Result<f64> {
    let e = |t: f64| model_energy(model, t, alpha, cutoff_ratio, route, tol.rel_sum_tail);
    Ok(specific_heat_fd(e, theta, tol.fd_step)?.value)
}

/// Closed-form specific heat where one exists.
pub fn closed_specific_heat(model: Model, theta: f64, alpha: f64, cutoff_ratio: f64, route: PrescriptionTag) -> Result<Option<f64>> {
    match model {
        Model::Oscillator if cutoff_ratio.is_finite() => Ok(None),
        Model::Oscillator if alpha == 0.0 => Ok(undamped_thermo(theta)?.specific_heat),
        Model::Oscillator => match route {
            PrescriptionTag::EnergyRoute => Ok(damped_specific_heat(theta, alpha)?.specific_heat),
            PrescriptionTag::PartitionRoute => Ok(damped_specific_heat_via_entropy(theta, alpha)?.specific_heat),
        },
        // the free partition route has a closed form only without a cutoff
        Model::Free if route == PrescriptionTag::PartitionRoute && cutoff_ratio.is_finite() => Ok(None),
        Model::Free => Ok(Some(drude_specific_heat(theta, cutoff_ratio)?.specific_heat)),
    }
}

fn curve_row(spec: &CurveSpec, theta: f64, tol: &Tolerances) -> Result<Vec<f64>> {
    spec.params(theta)?;
    let mut row = vec![theta];
    for q in [Quantity::C, Quantity::S, Quantity::E] {
        if !spec.quantities.contains(&q) {
            continue;
        }
        match q {
            Quantity::C => {
                for &r in spec.route.routes() {
                    let c = match closed_specific_heat(spec.model, theta, spec.alpha, spec.cutoff_ratio, r)? {
                        Some(c) => c,
                        None => model_specific_heat_fd(spec.model, theta, spec.alpha, spec.cutoff_ratio, r, tol)?,
                    };
                    row.push(c);
                }
            }
            Quantity::S => {
                let s = if spec.alpha == 0.0 {
                    undamped_thermo(theta)?.entropy
                } else {
                    damped_entropy(theta, spec.alpha)?.entropy
                };
                row.push(s.unwrap_or(f64::NAN));
            }
            Quantity::E => {
                for &r in spec.route.routes() {
                    row.push(model_energy(spec.model, theta, spec.alpha, spec.cutoff_ratio, r, tol.rel_sum_tail)?);
                }
            }
        }
    }
    Ok(row)
}

/// Tabulates the requested quantities on the grid.
pub fn curve_table(spec: &CurveSpec, tol: &Tolerances) -> std::result::Result<Table, PointFailure> {
    spec.validate().map_err(|error| PointFailure {
        theta: spec.grid.t_min,
        error,
    })?;
    let thetas = spec.grid.values();
    let rows = evaluate_grid(&thetas, |t| curve_row(spec, t, tol))?;
    let quantities: Vec<&str> = spec
        .quantities
        .iter()
        .map(|q| match q {
            Quantity::E => "E",
            Quantity::S => "S",
            Quantity::C => "C",
        })
        .collect();
    let comment = format!(
        "model={} kernel={} alpha={} cutoff_ratio={} tmin={} tmax={} points={} log={} route={} quantities={} rel_sum_tail={:e} fd_step={:e} energy_regularized={} version={}",
        spec.model,
        spec.kernel_name(),
        spec.alpha,
        fmt_ratio(spec.cutoff_ratio),
        spec.grid.t_min,
        spec.grid.t_max,
        spec.grid.points,
        spec.grid.log,
        spec.route.name(),
        quantities.join(";"),
        tol.rel_sum_tail,
        tol.fd_step,
        spec.energy_regularized(),
        VERSION
    );
    Ok(Table {
        header: spec.columns(),
        comment,
        rows,
    })
}

/// The default `fig1` grid: 400 log-spaced points on [1e-3, 10].
pub fn fig1_default_grid() -> Grid {
    Grid {
        t_min: 1e-3,
        t_max: 10.0,
        points: 400,
        log: true,
    }
}

/// Main curve (strict ohmic C and its low-temperature expansion) and inset
/// (C for each ratio in [`FIG1_RATIOS`] plus the expansion).
pub fn fig1_tables(grid: &Grid) -> std::result::Result<(Table, Table), PointFailure> {
    let thetas = grid.values();
    let rows = evaluate_grid(&thetas, |t| {
        let mut row = vec![t];
        for r in FIG1_RATIOS {
            row.push(drude_specific_heat(t, r)?.specific_heat);
        }
        row.push(ohmic_low_t_expansion(t).value);
        Ok(row)
    })?;
    let comment = |what: &str| {
        format!(
            "{what} tmin={} tmax={} points={} log={} version={}",
            grid.t_min, grid.t_max, grid.points, grid.log, VERSION
        )
    };
    let main = Table {
        header: vec!["theta_gamma".into(), "C_exact".into(), "C_expansion".into()],
        comment: comment("fig1 main: free particle, strict ohmic"),
        rows: rows.iter().map(|r| vec![r[0], r[4], r[5]]).collect(),
    };
    let inset = Table {
        header: vec![
            "theta_gamma".into(),
            "C_r0.01".into(),
            "C_r0.1".into(),
            "C_r1".into(),
            "C_rinf".into(),
            "C_expansion".into(),
        ],
        comment: comment("fig1 inset: free particle, cutoff_ratio=0.01;0.1;1;inf"),
        rows,
    };
    Ok((main, inset))
}

/// One point of the prescription comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparePoint {
    pub theta: f64,
    #[serde(rename = "E_direct")]
    pub e_direct: Option<f64>,
    #[serde(rename = "E_partition")]
    pub e_partition: Option<f64>,
    pub gap: Option<f64>,
    #[serde(rename = "C_closed")]
    pub c_closed: Option<f64>,
    #[serde(rename = "C_fd_direct")]
    pub c_fd_direct: Option<f64>,
    #[serde(rename = "C_fd_partition")]
    pub c_fd_partition: Option<f64>,
    pub status: String,
}

fn compare_point(model: Model, alpha: f64, cutoff_ratio: f64, theta: f64, tol: &Tolerances) -> ComparePoint {
    use PrescriptionTag::*;
    let mut p = ComparePoint {
        theta,
        e_direct: None,
        e_partition: None,
        gap: None,
        c_closed: None,
        c_fd_direct: None,
        c_fd_partition: None,
        status: String::new(),
    };
    let mut notes: Vec<String> = Vec::new();
    let divergent = cutoff_ratio.is_infinite() && (model == Model::Free || alpha > 0.0);
    if divergent {
        notes.push("absolute energy divergent for strict ohmic damping; E omitted, C from regularized sums".into());
    } else {
        match model_energy(model, theta, alpha, cutoff_ratio, EnergyRoute, tol.rel_sum_tail) {
            Ok(v) => p.e_direct = Some(v),
            Err(e) => notes.push(format!("E_direct: {e}")),
        }
        match model_energy(model, theta, alpha, cutoff_ratio, PartitionRoute, tol.rel_sum_tail) {
            Ok(v) => p.e_partition = Some(v),
            Err(e) => notes.push(format!("E_partition: {e}")),
        }
    }
    let gap = match model {
        _ if cutoff_ratio.is_infinite() => Ok(0.0),
        Model::Oscillator => DampingKernel::drude(alpha, alpha * cutoff_ratio)
            .and_then(|k| prescription_gap(System::Oscillator { omega0: 1.0 }, &k, 1.0 / theta, tol.rel_sum_tail))
            .map(|g| g.value),
        Model::Free => DampingKernel::drude(1.0, cutoff_ratio)
            .and_then(|k| prescription_gap(System::FreeParticle, &k, 1.0 / theta, tol.rel_sum_tail))
            .map(|g| g.value),
    };
    match gap {
        Ok(g) => {
            p.gap = Some(g);
            if cutoff_ratio.is_infinite() {
                notes.push("gap identically zero for strict ohmic damping".into());
            }
        }
        Err(e) => notes.push(format!("gap: {e}")),
    }
    match closed_specific_heat(model, theta, alpha, cutoff_ratio, EnergyRoute) {
        Ok(c) => p.c_closed = c,
        Err(e) => notes.push(format!("C_closed: {e}")),
    }
    match model_specific_heat_fd(model, theta, alpha, cutoff_ratio, EnergyRoute, tol) {
        Ok(c) => p.c_fd_direct = Some(c),
        Err(e) => notes.push(format!("C_fd_direct: {e}")),
    }
    match model_specific_heat_fd(model, theta, alpha, cutoff_ratio, PartitionRoute, tol) {
        Ok(c) => p.c_fd_partition = Some(c),
        Err(e) => notes.push(format!("C_fd_partition: {e}")),
    }
    p.status = if notes.is_empty() { "ok".into() } else { notes.join("; ") };
    p
}

/// Both energies, their gap and the specific heats at every grid point.
/// Failures are recorded in `status` and the run continues.
pub fn compare_report(model: Model, alpha: f64, cutoff_ratio: f64, grid: &Grid, tol: &Tolerances) -> Result<Vec<ComparePoint>> {
    match model {
        Model::Oscillator => ReducedParams::oscillator(grid.t_min, alpha, cutoff_ratio)?,
        Model::Free => ReducedParams::free_particle(grid.t_min, cutoff_ratio)?,
    };
    if model == Model::Oscillator && cutoff_ratio.is_finite() && alpha == 0.0 {
        return Err(domain("a Drude kernel needs alpha > 0"));
    }
    Ok(grid
        .values()
        .par_iter()
        .map(|&t| compare_point(model, alpha, cutoff_ratio, t, tol))
        .collect())
}

/// Which truncated expansion a report row refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionFamily {
    Oscillator(ExpansionKind),
    FreeLowT,
}

impl ExpansionFamily {
    pub fn name(self) -> &'static str {
        match self {
            ExpansionFamily::Oscillator(k) => k.name(),
            ExpansionFamily::FreeLowT => "free_lowT",
        }
    }

    /// Power of θ in the leading omitted term.
    pub fn remainder_order(self) -> Option<i32> {
        match self {
            ExpansionFamily::Oscillator(k) => k.remainder_order(),
            ExpansionFamily::FreeLowT => Some(5),
        }
    }

    /// Halving grid on which the remainder dominates rounding.
    pub fn default_grid(self) -> Grid {
        let (t_min, t_max) = match self {
            ExpansionFamily::Oscillator(ExpansionKind::UndampedLowT) => (0.02, 0.16),
            ExpansionFamily::Oscillator(ExpansionKind::DampedLowT) | ExpansionFamily::FreeLowT => (0.005, 0.04),
            ExpansionFamily::Oscillator(ExpansionKind::UndampedHighT) | ExpansionFamily::Oscillator(ExpansionKind::DampedHighT) => {
                (20.0, 160.0)
            }
        };
        Grid {
            t_min,
            t_max,
            points: 4,
            log: true,
        }
    }

    fn exact(self, theta: f64, alpha: f64, cutoff_ratio: f64) -> Result<f64> {
        let c = match self {
            ExpansionFamily::Oscillator(ExpansionKind::UndampedLowT | ExpansionKind::UndampedHighT) => {
                undamped_thermo(theta)?.specific_heat
            }
            ExpansionFamily::Oscillator(_) => damped_specific_heat(theta, alpha)?.specific_heat,
            ExpansionFamily::FreeLowT => Some(drude_specific_heat(theta, cutoff_ratio)?.specific_heat),
        };
        Ok(c.unwrap_or(f64::NAN))
    }

    fn expansion(self, theta: f64, alpha: f64) -> (f64, f64) {
        let e = match self {
            ExpansionFamily::Oscillator(k) => oscillator_expansion(k, theta, alpha),
            ExpansionFamily::FreeLowT => ohmic_low_t_expansion(theta),
        };
        (e.value, e.last_term)
    }
}

/// One row of the expansion report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionRow {
    pub family: ExpansionFamily,
    pub theta: f64,
    pub exact: f64,
    pub expansion: f64,
    pub abs_err: f64,
    pub last_term: f64,
    /// log₂(err(θ)/err(θ/2)), signed so that an O(θᵖ) remainder gives p.
    pub exponent: f64,
}

pub fn expansion_rows(
    family: ExpansionFamily,
    alpha: f64,
    cutoff_ratio: f64,
    grid: &Grid,
) -> std::result::Result<Vec<ExpansionRow>, PointFailure> {
    evaluate_grid(&grid.values(), |theta| {
        let err_at = |t: f64| -> Result<f64> { Ok((family.exact(t, alpha, cutoff_ratio)? - family.expansion(t, alpha).0).abs()) };
        let exact = family.exact(theta, alpha, cutoff_ratio)?;
        let (expansion, last_term) = family.expansion(theta, alpha);
        let abs_err = (exact - expansion).abs();
        let exponent = (abs_err / err_at(0.5 * theta)?).log2();
        Ok(ExpansionRow {
            family,
            theta,
            exact,
            expansion,
            abs_err,
            last_term,
            exponent,
        })
    })
}

pub fn write_expansion_csv<W: Write>(rows: &[ExpansionRow], comment: &str, mut out: W) -> io::Result<()> {
    writeln!(out, "kind,theta,exact,expansion,abs_err,last_term,exponent")?;
    writeln!(out, "# {comment}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.family.name(),
            format_value(r.theta),
            format_value(r.exact),
            format_value(r.expansion),
            format_value(r.abs_err),
            format_value(r.last_term),
            format_value(r.exponent)
        )?;
    }
    Ok(())
}
