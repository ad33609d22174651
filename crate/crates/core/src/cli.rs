//! Command-line front end: argument parsing and file output.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::oscillator::ExpansionKind;
use crate::report::{
    compare_report, curve_table, expansion_rows, fig1_default_grid, fig1_tables, write_expansion_csv, CurveSpec,
    ExpansionFamily, Grid, Model, PointFailure, Quantity, RouteSelection, VERSION,
};
use crate::units::Tolerances;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qbm-thermo", version, about = "Thermodynamics of damped quantum oscillators and free Brownian particles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate E, S and C along a temperature grid.
    Curve(CurveArgs),
    /// Write the free-particle specific heat curves (main panel and inset).
    Fig1(Fig1Args),
    /// Compare the two energy prescriptions point by point (JSON).
    Compare(CompareArgs),
    /// Check truncated expansions against the exact specific heat.
    Expansions(ExpansionArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    Oscillator,
    Free,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KernelArg {
    Ohmic,
    Drude,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RouteArg {
    Energy,
    Partition,
    Both,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "oscillator")]
    pub model: ModelArg,
    #[arg(long, value_enum, default_value = "ohmic")]
    pub kernel: KernelArg,
    /// Damping ratio γ/ω₀ (oscillator only).
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Cutoff ratio ω_D/γ (Drude kernel only).
    #[arg(long)]
    pub cutoff_ratio: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Lowest reduced temperature.
    #[arg(long)]
    pub tmin: Option<f64>,
    /// Highest reduced temperature.
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Logarithmic spacing.
    #[arg(long)]
    pub log: bool,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value = "energy")]
    pub route: RouteArg,
    /// Comma-separated subset of E, S, C.
    #[arg(long, default_value = "C")]
    pub quantities: String,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Relative accuracy of the Matsubara sums.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct Fig1Args {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ExpansionArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Overrides the per-expansion default grids when any bound is given.
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed invocation and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(String),
    Io(io::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) | Failure::Io(_) => EXIT_USAGE,
            Failure::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure {m}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<PointFailure> for Failure {
    fn from(p: PointFailure) -> Self {
        match p.error {
            crate::Error::Domain(_) => Failure::Usage(p.to_string()),
            _ => Failure::Numerical(p.to_string()),
        }
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

impl ModelArgs {
    fn resolve(&self) -> Result<(Model, f64, f64), Failure> {
        let model = match self.model {
            ModelArg::Oscillator => Model::Oscillator,
            ModelArg::Free => Model::Free,
        };
        let ratio = match (self.kernel, self.cutoff_ratio) {
            (KernelArg::Ohmic, None) => f64::INFINITY,
            (KernelArg::Ohmic, Some(r)) if r.is_infinite() => f64::INFINITY,
            (KernelArg::Ohmic, Some(_)) => return Err(usage("--cutoff-ratio requires --kernel drude")),
            (KernelArg::Drude, None) => return Err(usage("--kernel drude requires --cutoff-ratio")),
            (KernelArg::Drude, Some(r)) => r,
        };
        let alpha = if model == Model::Free { 0.0 } else { self.alpha };
        Ok((model, alpha, ratio))
    }
}

impl GridArgs {
    fn any_set(&self) -> bool {
        self.tmin.is_some() || self.tmax.is_some() || self.points.is_some()
    }

    fn resolve(&self, default: Grid) -> Result<Grid, Failure> {
        let log = if self.any_set() { self.log } else { default.log || self.log };
        Grid::new(
            self.tmin.unwrap_or(default.t_min),
            self.tmax.unwrap_or(default.t_max),
            self.points.unwrap_or(default.points),
            log,
        )
        .map_err(usage)
    }
}

fn tolerances(tol: Option<f64>) -> Result<Tolerances, Failure> {
    let d = Tolerances::default();
    match tol {
        None => Ok(d),
        Some(t) => Tolerances::new(t, d.quad_abs, d.fd_step).map_err(usage),
    }
}

fn parse_quantities(s: &str) -> Result<Vec<Quantity>, Failure> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let q = match part {
            "E" | "e" => Quantity::E,
            "S" | "s" => Quantity::S,
            "C" | "c" => Quantity::C,
            other => return Err(usage(format!("unknown quantity '{other}', expected E, S or C"))),
        };
        if !out.contains(&q) {
            out.push(q);
        }
    }
    Ok(out)
}

fn writer(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run_curve(a: &CurveArgs) -> Result<(), Failure> {
    let (model, alpha, cutoff_ratio) = a.model.resolve()?;
    let spec = CurveSpec {
        model,
        alpha,
        cutoff_ratio,
        grid: a.grid.resolve(Grid {
            t_min: 0.01,
            t_max: 10.0,
            points: 100,
            log: true,
        })?,
        route: match a.route {
            RouteArg::Energy => RouteSelection::Energy,
            RouteArg::Partition => RouteSelection::Partition,
            RouteArg::Both => RouteSelection::Both,
        },
        quantities: parse_quantities(&a.quantities)?,
    };
    spec.validate().map_err(usage)?;
    let table = curve_table(&spec, &tolerances(a.tol)?)?;
    let mut w = writer(&a.out)?;
    table.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn run_fig1(a: &Fig1Args) -> Result<(), Failure> {
    let grid = a.grid.resolve(fig1_default_grid())?;
    let (main, inset) = fig1_tables(&grid)?;
    std::fs::create_dir_all(&a.out)?;
    for (name, table) in [("fig1_main.csv", &main), ("fig1_inset.csv", &inset)] {
        let mut w = BufWriter::new(File::create(Path::new(&a.out).join(name))?);
        table.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn run_compare(a: &CompareArgs) -> Result<(), Failure> {
    let (model, alpha, cutoff_ratio) = a.model.resolve()?;
    let grid = a.grid.resolve(Grid {
        t_min: 0.1,
        t_max: 10.0,
        points: 9,
        log: true,
    })?;
    let report = compare_report(model, alpha, cutoff_ratio, &grid, &tolerances(a.tol)?).map_err(usage)?;
    let mut w = writer(&a.out)?;
    serde_json::to_writer_pretty(&mut w, &report).map_err(io::Error::other)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn run_expansions(a: &ExpansionArgs) -> Result<(), Failure> {
    let (model, alpha, cutoff_ratio) = a.model.resolve()?;
    let families: Vec<ExpansionFamily> = match model {
        Model::Oscillator => {
            if cutoff_ratio.is_finite() {
                return Err(usage("oscillator expansions are for strict ohmic damping"));
            }
            ExpansionKind::ALL.iter().map(|&k| ExpansionFamily::Oscillator(k)).collect()
        }
        Model::Free => vec![ExpansionFamily::FreeLowT],
    };
    let mut rows = Vec::new();
    for f in families {
        let grid = a.grid.resolve(f.default_grid())?;
        rows.extend(expansion_rows(f, alpha, cutoff_ratio, &grid)?);
    }
    let comment = format!(
        "model={model} alpha={alpha} cutoff_ratio={} exponent=log2(err(theta)/err(theta/2)) version={VERSION}",
        if cutoff_ratio.is_infinite() { "inf".to_string() } else { cutoff_ratio.to_string() }
    );
    let mut w = writer(&a.out)?;
    write_expansion_csv(&rows, &comment, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Runs a parsed command.
pub fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Curve(a) => run_curve(a),
        Command::Fig1(a) => run_fig1(a),
        Command::Compare(a) => run_compare(a),
        Command::Expansions(a) => run_expansions(a),
    }
}

/// Parses `std::env::args`, runs, and returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("qbm-thermo: {f}");
            f.exit_code()
        }
    }
}
