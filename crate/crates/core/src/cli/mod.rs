//! Command-line front end of the `affine` binary.

mod grid;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Mutex;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::error::{AffineError, Result};
use crate::model::spec_file::{ModelSpec, RunSpec};
use crate::model::{validate_admissible, AdmissibleParameters, ComplexArgument};
use crate::montecarlo::{fmt_f64, gof_from_batch, simulate_paths, simulate_paths_at, GofMode};
use crate::riccati::{solve_batch, SolveOptions};
use crate::stationary::{check_ergodicity, invert_density_1d, stationary_cf, stationary_cf_batch, DensityGrid};

pub use grid::{parse_u_grid, parse_vector};

const DEFAULT_TOL: f64 = 1e-8;
const DEFAULT_TERMS: usize = 1024;

#[derive(Debug, Parser)]
#[command(
    name = "affine",
    version,
    about = "Affine processes: transforms, stationary laws, simulation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the admissibility conditions and print a JSON report.
    Validate { spec: PathBuf },
    /// E_x[exp(<u, X_t>)] on a grid of arguments, as CSV.
    Transform {
        spec: PathBuf,
        /// Starting state, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        #[arg(long)]
        t: Option<f64>,
        /// Per-coordinate grids separated by ';' (see README).
        #[arg(long = "u-grid", allow_hyphen_values = true)]
        u_grid: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Characteristic function of the limiting distribution, as CSV.
    Stationary {
        spec: PathBuf,
        #[arg(long = "u-grid", allow_hyphen_values = true)]
        u_grid: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        /// Density grid `lo:hi:points` (one-dimensional models).
        #[arg(long, allow_hyphen_values = true, requires = "density_out")]
        density: Option<String>,
        /// Output file for the density CSV.
        #[arg(long = "density-out")]
        density_out: Option<PathBuf>,
        /// Number of cosine terms for the density.
        #[arg(long, default_value_t = DEFAULT_TERMS)]
        terms: usize,
    },
    /// Simulate paths (CSV) or a goodness-of-fit report (JSON).
    Simulate {
        spec: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        /// Horizon.
        #[arg(long = "T")]
        horizon: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Emit the goodness-of-fit report at the horizon instead of paths.
        #[arg(long)]
        gof: bool,
        #[arg(long = "gof-mode", value_enum, default_value_t = ModeArg::Finite)]
        gof_mode: ModeArg,
        #[arg(long = "u-grid", allow_hyphen_values = true)]
        u_grid: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        /// Write the path CSV here (with --gof the paths are otherwise not written).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Finite,
    Stationary,
}

fn io_err(e: impl std::fmt::Display) -> AffineError {
    AffineError::InvalidInput(format!("output: {e}"))
}

struct Loaded {
    params: AdmissibleParameters,
    run: RunSpec,
}

fn load(path: &PathBuf) -> Result<(ModelSpec, AdmissibleParameters)> {
    let spec = ModelSpec::load(path)?;
    let params = spec.to_params()?;
    Ok((spec, params))
}

/// Loads and requires admissibility.
fn load_admissible(path: &PathBuf) -> Result<Loaded> {
    let (spec, params) = load(path)?;
    validate_admissible(&params)?.into_result()?;
    Ok(Loaded {
        params,
        run: spec.run.unwrap_or_default(),
    })
}

fn u_points(flag: &Option<String>, run: &RunSpec, p: &AdmissibleParameters) -> Result<Vec<ComplexArgument>> {
    if let Some(text) = flag {
        return parse_u_grid(text, p.dims);
    }
    match &run.u_grid {
        Some(points) => points
            .iter()
            .map(|pt| ComplexArgument::new(p.dims, pt.iter().map(|e| e.to_complex()).collect()))
            .collect(),
        None => Err(AffineError::InvalidInput(
            "no u-grid: pass --u-grid or set run.u_grid".into(),
        )),
    }
}

fn state(flag: &Option<String>, fallback: &Option<Vec<f64>>, name: &str) -> Result<Vec<f64>> {
    match (flag, fallback) {
        (Some(text), _) => parse_vector(text),
        (None, Some(v)) => Ok(v.clone()),
        (None, None) => Err(AffineError::InvalidInput(format!("missing --{name}"))),
    }
}

fn required<T: Copy>(flag: Option<T>, fallback: Option<T>, name: &str) -> Result<T> {
    flag.or(fallback)
        .ok_or_else(|| AffineError::InvalidInput(format!("missing --{name}")))
}

fn u_header(d: usize) -> Vec<String> {
    (1..=d).flat_map(|j| [format!("u{j}_re"), format!("u{j}_im")]).collect()
}

fn u_fields(u: &ComplexArgument) -> Vec<String> {
    u.as_slice()
        .iter()
        .flat_map(|z| [fmt_f64(z.re), fmt_f64(z.im)])
        .collect()
}

fn describe(u: &ComplexArgument) -> String {
    let parts: Vec<String> = u.as_slice().iter().map(|z| format!("({}, {})", z.re, z.im)).collect();
    format!("[{}]", parts.join(", "))
}

fn cmd_validate(spec: &PathBuf, out: &mut dyn Write) -> Result<i32> {
    let (_, params) = load(spec)?;
    let report = validate_admissible(&params)?;
    let json = serde_json::to_string_pretty(&report).map_err(io_err)?;
    writeln!(out, "{json}").map_err(io_err)?;
    Ok(if report.admissible { 0 } else { 1 })
}

fn cmd_transform(
    spec: &PathBuf,
    x: &Option<String>,
    t: Option<f64>,
    u_grid: &Option<String>,
    tol: Option<f64>,
    out: &mut dyn Write,
) -> Result<i32> {
    let Loaded { params: p, run } = load_admissible(spec)?;
    let x = state(x, &run.x, "x")?;
    if x.len() != p.dims.d() || !p.dims.contains(&x) {
        return Err(AffineError::Domain(format!("x = {x:?} is not a state of D")));
    }
    let t = required(t, run.t, "t")?;
    let tol = tol.or(run.tol).unwrap_or(DEFAULT_TOL);
    let us = u_points(u_grid, &run, &p)?;
    let sols = solve_batch(&p, &us, t, &SolveOptions::new(tol));
    let mut w = csv::Writer::from_writer(out);
    let mut header = u_header(p.dims.d());
    header.extend(["re", "im", "steps_accepted", "steps_rejected", "rhs_evaluations"].map(String::from));
    w.write_record(&header).map_err(io_err)?;
    for (u, sol) in us.iter().zip(sols) {
        let fail = |e: AffineError| match e {
            AffineError::SolverFailure { t_reached, reason } => AffineError::SolverFailure {
                t_reached,
                reason: format!("u = {}: {reason}", describe(u)),
            },
            other => other,
        };
        let sol = sol.map_err(fail)?;
        let value = sol.transform(&x, t).map_err(fail)?;
        let stats = sol.stats();
        let mut row = u_fields(u);
        row.extend([
            fmt_f64(value.re),
            fmt_f64(value.im),
            stats.accepted.to_string(),
            stats.rejected.to_string(),
            stats.rhs_evaluations.to_string(),
        ]);
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(0)
}

fn parse_density_grid(text: &str) -> Result<DensityGrid> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || AffineError::InvalidInput(format!("density grid must be lo:hi:points, got {text:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let points: usize = parts[2].trim().parse().map_err(|_| bad())?;
    DensityGrid::new(lo, hi, points)
}

#[allow(clippy::too_many_arguments)]
fn cmd_stationary(
    spec: &PathBuf,
    u_grid: &Option<String>,
    tol: Option<f64>,
    density: &Option<String>,
    density_out: &Option<PathBuf>,
    terms: usize,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let Loaded { params: p, run } = load_admissible(spec)?;
    let report = check_ergodicity(&p);
    if !report.verdict {
        for note in &report.notes {
            writeln!(err, "note: {note}").map_err(io_err)?;
        }
        report.into_result()?;
    }
    let tol = tol.or(run.tol).unwrap_or(DEFAULT_TOL);
    let grid_given = u_grid.is_some() || run.u_grid.is_some();
    if grid_given || density.is_none() {
        let us = u_points(u_grid, &run, &p)?;
        let values = stationary_cf_batch(&p, &us, tol)?;
        let mut w = csv::Writer::from_writer(&mut *out);
        let mut header = u_header(p.dims.d());
        header.extend(["re", "im", "tail_bound", "horizon", "decay_rate"].map(String::from));
        w.write_record(&header).map_err(io_err)?;
        for (u, v) in us.iter().zip(values) {
            let v = v?;
            let mut row = u_fields(u);
            row.extend([
                fmt_f64(v.value.re),
                fmt_f64(v.value.im),
                fmt_f64(v.tail_bound),
                fmt_f64(v.horizon),
                fmt_f64(v.decay_rate),
            ]);
            w.write_record(&row).map_err(io_err)?;
        }
        w.flush().map_err(io_err)?;
    }
    if let (Some(text), Some(path)) = (density, density_out) {
        if p.dims.d() != 1 {
            return Err(AffineError::Unsupported(format!(
                "density inversion needs d = 1, model has d = {}",
                p.dims.d()
            )));
        }
        let grid = parse_density_grid(text)?;
        let failure = Mutex::new(None);
        let cf = |s: f64| -> Complex64 {
            let u = ComplexArgument::new(p.dims, vec![Complex64::new(0.0, s)]).expect("imaginary argument");
            match stationary_cf(&p, &u, tol) {
                Ok(v) => v.value,
                Err(e) => {
                    failure.lock().expect("lock").get_or_insert(e);
                    Complex64::new(f64::NAN, f64::NAN)
                }
            }
        };
        let inv = invert_density_1d(cf, grid, terms);
        if let Some(e) = failure.into_inner().expect("lock") {
            return Err(e);
        }
        let inv = inv?;
        let file = std::fs::File::create(path)
            .map_err(|e| AffineError::InvalidInput(format!("cannot create {}: {e}", path.display())))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(["x", "density", "cell_mass"]).map_err(io_err)?;
        for (k, (x, f)) in inv.x.iter().zip(&inv.density).enumerate() {
            let mass = inv.cell_mass.get(k).map(|m| fmt_f64(*m)).unwrap_or_default();
            w.write_record([fmt_f64(*x), fmt_f64(*f), mass]).map_err(io_err)?;
        }
        w.flush().map_err(io_err)?;
        writeln!(
            err,
            "density: {} points, truncation error estimate {:e}, endpoint correction {}",
            inv.x.len(),
            inv.truncation_error,
            if inv.corrected { "applied" } else { "skipped" }
        )
        .map_err(io_err)?;
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    spec: &PathBuf,
    x0: &Option<String>,
    horizon: Option<f64>,
    dt: Option<f64>,
    paths: Option<usize>,
    seed: Option<u64>,
    gof: bool,
    mode: ModeArg,
    u_grid: &Option<String>,
    tol: Option<f64>,
    out_path: &Option<PathBuf>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let Loaded { params: p, run } = load_admissible(spec)?;
    let x0 = state(x0, &run.x0, "x0")?;
    let horizon = required(horizon, run.horizon, "T")?;
    let dt = required(dt, run.dt, "dt")?;
    let n_paths = paths.or(run.paths).unwrap_or(1);
    let seed = seed.or(run.seed).unwrap_or(0);
    let tol = tol.or(run.tol).unwrap_or(DEFAULT_TOL);
    let batch = if gof && out_path.is_none() {
        simulate_paths_at(&p, &x0, &[horizon], dt, n_paths, seed)?
    } else {
        simulate_paths(&p, &x0, horizon, dt, n_paths, seed)?
    };
    for w in &batch.warnings {
        writeln!(err, "warning: {w}").map_err(io_err)?;
    }
    if let Some(path) = out_path {
        let file = std::fs::File::create(path)
            .map_err(|e| AffineError::InvalidInput(format!("cannot create {}: {e}", path.display())))?;
        batch.write_csv(std::io::BufWriter::new(file))?;
    }
    if gof {
        let us = u_points(u_grid, &run, &p)?;
        let mode = match mode {
            ModeArg::Finite => GofMode::Finite,
            ModeArg::Stationary => GofMode::Stationary,
        };
        let report = gof_from_batch(&p, &batch, *batch.times.last().unwrap_or(&0.0), &us, mode, tol)?;
        let json = serde_json::to_string_pretty(&report).map_err(io_err)?;
        writeln!(out, "{json}").map_err(io_err)?;
    } else if out_path.is_none() {
        batch.write_csv(&mut *out)?;
    }
    Ok(0)
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Validate { spec } => cmd_validate(spec, out),
        Command::Transform {
            spec,
            x,
            t,
            u_grid,
            tol,
        } => cmd_transform(spec, x, *t, u_grid, *tol, out),
        Command::Stationary {
            spec,
            u_grid,
            tol,
            density,
            density_out,
            terms,
        } => cmd_stationary(spec, u_grid, *tol, density, density_out, *terms, out, err),
        Command::Simulate {
            spec,
            x0,
            horizon,
            dt,
            paths,
            seed,
            gof,
            gof_mode,
            u_grid,
            tol,
            out: out_path,
        } => cmd_simulate(
            spec, x0, *horizon, *dt, *paths, *seed, *gof, *gof_mode, u_grid, *tol, out_path, out, err,
        ),
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 2;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
