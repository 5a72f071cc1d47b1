//! capflow: solve weighted equilibrium problems on spheres from the shell.
//!
//! Subcommands: solve (support angle and constants), density (tabulate
//! f(eta)), capacity (spherical cap capacity), ffunc-sweep (tabulate the
//! support functional), verify (independent potential verification).
//!
//! Exit codes: 0 success, 1 verification thresholds failed, 2 configuration
//! error, 3 numerical non-convergence.

// validation uses !(x > y) comparisons so NaN inputs fail closed
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use capflow::equilibrium::cap_capacity;
use capflow::fields::{CubicSpline, CustomField, ExternalField};
use capflow::functional::f_functional_sweep;
use capflow::sphere::{Dimension, Pole};
use capflow::verify::variational_check;
use capflow::{Error, ProblemSpec, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "capflow",
    version,
    about = "Weighted equilibrium measures on the unit sphere under Newtonian interaction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the support angle, Robin constant and density coefficient
    Solve(SolveArgs),
    /// Tabulate the equilibrium density f(eta) over the support
    Density(DensityArgs),
    /// Newtonian capacity of the South cap of a given angle
    Capacity(CapacityArgs),
    /// Tabulate the support functional F(alpha) over a grid of cap angles
    #[command(name = "ffunc-sweep")]
    FfuncSweep(SweepArgs),
    /// Solve, then verify the solution against the variational conditions
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldKind {
    Zero,
    PointCharge,
    Quadratic,
    Custom,
}

#[derive(Clone, Copy, ValueEnum)]
enum PoleArg {
    South,
    North,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct ProblemArgs {
    /// Ambient dimension d (the sphere is S^(d-1)), d >= 3
    #[arg(long)]
    d: u32,
    /// External field
    #[arg(long, value_enum, default_value = "zero")]
    field: FieldKind,
    /// Charge strength for --field point-charge
    #[arg(long)]
    q: Option<f64>,
    /// Two-column CSV (theta, Q) defining a custom field by cubic spline
    #[arg(long)]
    field_file: Option<PathBuf>,
    /// Force the support angle instead of solving for it
    #[arg(long)]
    alpha: Option<f64>,
    /// Pole the supporting cap is centered on
    #[arg(long, value_enum, default_value = "south")]
    pole: PoleArg,
    /// Interpret input angles as degrees
    #[arg(long)]
    degrees: bool,
    /// Relative quadrature tolerance (absolute floor is tol/100)
    #[arg(long)]
    tol: Option<f64>,
    /// Subdivision budget per adaptive integral
    #[arg(long)]
    max_intervals: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write to a file instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Number of tabulated rows
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Offset from the cap edge where tabulation starts (radians)
    #[arg(long, default_value_t = 0.02)]
    delta: f64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CapacityArgs {
    /// Ambient dimension d, d >= 3
    #[arg(long)]
    d: u32,
    /// Cap angle alpha in (0, pi]
    #[arg(long)]
    alpha: f64,
    /// Interpret input angles as degrees
    #[arg(long)]
    degrees: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Number of grid points
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Smallest cap angle of the grid (radians unless --degrees)
    #[arg(long, default_value_t = 0.05)]
    alpha_min: f64,
    /// Largest cap angle of the grid (radians unless --degrees)
    #[arg(long, default_value_t = PI - 0.05)]
    alpha_max: f64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Sample count per side (on-support and off-support)
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// Write the verification report JSON here instead of stdout
    #[arg(long)]
    report: Option<PathBuf>,
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("CAPFLOW_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Solve(args) => {
            let sol = build_problem(&args.problem)?.solve()?;
            let mut obj = serde_json::json!({
                "d": sol.d.get(),
                "field": sol.field.describe(),
                "pole": pole_name(sol.pole),
                "alpha0": sol.alpha0,
                "method": sol.method.to_string(),
                "residual": sol.residual,
                "F_Q": sol.f_q,
                "C_Q": sol.c_q,
            });
            if let Some(w) = &sol.warning {
                obj["warning"] = serde_json::json!(w);
            }
            let text = match args.format {
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&obj).unwrap()),
                Format::Csv => format!(
                    "alpha0,F_Q,C_Q,method,residual\n{},{},{},{},{}\n",
                    sol.alpha0, sol.f_q, sol.c_q, sol.method, sol.residual
                ),
            };
            emit(args.output.as_deref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Density(args) => {
            if args.points < 2 {
                return Err(Error::InvalidInput("--points must be at least 2".into()));
            }
            if !(args.delta > 0.0 && args.delta < PI) {
                return Err(Error::InvalidInput("--delta must lie in (0, pi)".into()));
            }
            let sol = build_problem(&args.problem)?.solve()?;
            // tabulate from delta inside the cap edge to the pole; the full
            // sphere has no edge and uses [0, pi] whole
            let (lo, hi) = if sol.is_full_sphere() {
                (0.0, PI)
            } else {
                match sol.pole {
                    Pole::South => (sol.alpha0 + args.delta, PI),
                    Pole::North => (0.0, sol.alpha0 - args.delta),
                }
            };
            if !(hi > lo) {
                return Err(Error::InvalidInput(format!(
                    "--delta {} leaves no support to tabulate (cap angle {})",
                    args.delta, sol.alpha0
                )));
            }
            let mut etas = Vec::with_capacity(args.points);
            let mut vals = Vec::with_capacity(args.points);
            for i in 0..args.points {
                let eta = lo + (hi - lo) * i as f64 / (args.points - 1) as f64;
                etas.push(eta);
                vals.push(sol.density.eval(eta)?);
            }
            let text = match args.format {
                Format::Csv => {
                    let mut s = String::from("eta_radians,f_eta\n");
                    for (eta, f) in etas.iter().zip(&vals) {
                        s.push_str(&format!("{eta},{f}\n"));
                    }
                    s
                }
                Format::Json => {
                    let obj = serde_json::json!({
                        "d": sol.d.get(),
                        "field": sol.field.describe(),
                        "alpha0": sol.alpha0,
                        "eta_radians": etas,
                        "f_eta": vals,
                    });
                    format!("{}\n", serde_json::to_string_pretty(&obj).unwrap())
                }
            };
            emit(args.output.as_deref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Capacity(args) => {
            let d = Dimension::new(args.d)?;
            let alpha = convert_angle(args.alpha, args.degrees);
            let c = cap_capacity(d, alpha)?;
            let text = match args.format {
                Format::Csv => format!("{c}\n"),
                Format::Json => format!(
                    "{}\n",
                    serde_json::to_string_pretty(&serde_json::json!({
                        "d": args.d,
                        "alpha": alpha,
                        "capacity": c,
                    }))
                    .unwrap()
                ),
            };
            emit(args.output.as_deref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::FfuncSweep(args) => {
            if args.points < 2 {
                return Err(Error::InvalidInput("--points must be at least 2".into()));
            }
            let spec = build_problem(&args.problem)?;
            let lo = convert_angle(args.alpha_min, args.problem.degrees);
            let hi = convert_angle(args.alpha_max, args.problem.degrees);
            if !(lo > 0.0 && lo < hi && hi < PI) {
                return Err(Error::InvalidInput(format!(
                    "sweep range ({lo}, {hi}) must satisfy 0 < alpha_min < alpha_max < pi"
                )));
            }
            let alphas: Vec<f64> = (0..args.points)
                .map(|i| lo + (hi - lo) * i as f64 / (args.points - 1) as f64)
                .collect();
            let rows = f_functional_sweep(spec.d, &spec.field, &alphas, &spec.quad)?;
            let text = match args.format {
                Format::Csv => {
                    let mut s = String::from("alpha_radians,F_value\n");
                    for (a, v) in &rows {
                        s.push_str(&format!("{a},{v}\n"));
                    }
                    s
                }
                Format::Json => {
                    let obj = serde_json::json!({
                        "d": spec.d.get(),
                        "field": spec.field.describe(),
                        "alpha_radians": rows.iter().map(|r| r.0).collect::<Vec<_>>(),
                        "F_value": rows.iter().map(|r| r.1).collect::<Vec<_>>(),
                    });
                    format!("{}\n", serde_json::to_string_pretty(&obj).unwrap())
                }
            };
            emit(args.output.as_deref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(args) => {
            if args.samples < 2 {
                return Err(Error::InvalidInput("--samples must be at least 2".into()));
            }
            let spec = build_problem(&args.problem)?;
            let sol = spec.solve()?;
            let report = variational_check(&sol, &spec.quad, args.samples)?;
            let text = format!("{}\n", serde_json::to_string_pretty(&report).unwrap());
            emit(args.report.as_deref(), &text)?;
            if report.passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("verification thresholds failed");
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn pole_name(p: Pole) -> &'static str {
    match p {
        Pole::South => "south",
        Pole::North => "north",
    }
}

fn convert_angle(x: f64, degrees: bool) -> f64 {
    if degrees {
        x * PI / 180.0
    } else {
        x
    }
}

fn build_problem(args: &ProblemArgs) -> Result<ProblemSpec> {
    let d = Dimension::new(args.d)?;
    let field = match args.field {
        FieldKind::Zero => ExternalField::Zero,
        FieldKind::PointCharge => {
            let q = args
                .q
                .ok_or_else(|| Error::InvalidInput("--field point-charge requires --q".into()))?;
            ExternalField::point_charge(q)?
        }
        FieldKind::Quadratic => ExternalField::Quadratic,
        FieldKind::Custom => {
            let path = args.field_file.as_deref().ok_or_else(|| {
                Error::InvalidInput("--field custom requires --field-file".into())
            })?;
            load_field_file(path, args.degrees)?
        }
    };
    let mut spec = ProblemSpec::new(d, field);
    spec.pole = match args.pole {
        PoleArg::South => Pole::South,
        PoleArg::North => Pole::North,
    };
    spec.alpha_override = args.alpha.map(|a| convert_angle(a, args.degrees));
    if let Some(tol) = args.tol {
        spec.quad.rel_tol = tol;
        spec.quad.abs_tol = tol * 1e-2;
    }
    if let Some(n) = args.max_intervals {
        spec.quad.max_intervals = n;
    }
    Ok(spec)
}

/// Reads a two-column CSV of (theta, Q(theta)) samples and interpolates them
/// with a cubic spline. A non-numeric first row is treated as a header.
fn load_field_file(path: &Path, degrees: bool) -> Result<ExternalField> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        if record.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "{}: row {} has fewer than two columns",
                path.display(),
                i + 1
            )));
        }
        let parsed: std::result::Result<(f64, f64), _> = record[0]
            .parse::<f64>()
            .and_then(|t| record[1].parse::<f64>().map(|q| (t, q)));
        match parsed {
            Ok((theta, q)) => points.push((convert_angle(theta, degrees), q)),
            Err(e) if i == 0 => {
                let _ = e; // header row
            }
            Err(e) => {
                return Err(Error::InvalidInput(format!(
                    "{}: row {}: {e}",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let spline = CubicSpline::new(&points)?;
    let label = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok(ExternalField::Custom(CustomField::new(
        move |theta| spline.eval(theta),
        true,
        label,
    )))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|()| out.flush())
                .map_err(|e| Error::InvalidInput(format!("cannot write stdout: {e}")))
        }
    }
}
