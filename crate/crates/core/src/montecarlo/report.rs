use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::{simulate_paths_at, PathBatch};
use crate::error::{AffineError, Result};
use crate::model::{AdmissibleParameters, ComplexArgument};
use crate::riccati::char_fn;
use crate::stationary::{require_ergodic, stationary_cf};

const FLAG_Z: f64 = 4.0;

fn sample(batch: &PathBatch, k: usize, u: &ComplexArgument) -> Result<Vec<Complex64>> {
    if u.as_slice().len() != batch.dim {
        return Err(AffineError::Dimension(format!(
            "argument has {} entries, paths have d = {}",
            u.as_slice().len(),
            batch.dim
        )));
    }
    Ok((0..batch.n_paths)
        .into_par_iter()
        .map(|i| {
            let x = batch.state(i, k);
            let e: Complex64 = u.as_slice().iter().zip(x).map(|(a, b)| a * b).sum();
            e.exp()
        })
        .collect())
}

/// Sample mean of `exp(<u, X_t>)` and the half-width `3 / sqrt(n)`.
pub fn empirical_cf(batch: &PathBatch, t: f64, u: &ComplexArgument) -> Result<(Complex64, f64)> {
    if batch.n_paths == 0 {
        return Err(AffineError::InvalidInput("empty batch".into()));
    }
    let k = batch.time_index(t)?;
    let vals = sample(batch, k, u)?;
    let mean = vals.iter().sum::<Complex64>() / batch.n_paths as f64;
    Ok((mean, 3.0 / (batch.n_paths as f64).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GofMode {
    /// Against `E_x[exp(<u, X_t>)]`.
    Finite,
    /// Against the stationary characteristic function.
    Stationary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofRow {
    pub u: Vec<Complex64>,
    pub analytic: Complex64,
    pub empirical: Complex64,
    pub half_width: f64,
    /// Normal-equivalent score of the deviation under the sample covariance of
    /// `(Re, Im) exp(<u, X_t>)`.
    pub z: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofReport {
    pub mode: GofMode,
    pub t: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub dt: f64,
    pub rows: Vec<GofRow>,
    pub max_abs_z: f64,
    pub fraction_within_2: f64,
    pub any_flagged: bool,
    pub warnings: Vec<String>,
}

/// Score of `delta` against the sample covariance of `vals`; deviations up
/// to `slack` count as zero.
fn z_score(vals: &[Complex64], delta: Complex64, slack: f64) -> f64 {
    if delta.norm() <= slack {
        return 0.0;
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<Complex64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for v in vals {
        let d = v - mean;
        sxx += d.re * d.re;
        syy += d.im * d.im;
        sxy += d.re * d.im;
    }
    let denom = (n - 1.0).max(1.0) * n;
    let (sxx, syy, sxy) = (sxx / denom, syy / denom, sxy / denom);
    let trace = sxx + syy;
    if trace <= 0.0 {
        return f64::INFINITY;
    }
    let det = sxx * syy - sxy * sxy;
    if det <= 1e-12 * trace * trace {
        // one-dimensional: project onto the principal axis
        let (ex, ey) = if sxx >= syy { (sxx, sxy) } else { (sxy, syy) };
        let norm = (ex * ex + ey * ey).sqrt();
        let along = (delta.re * ex + delta.im * ey) / norm;
        let across = (delta.im * ex - delta.re * ey) / norm;
        if across.abs() > slack {
            return f64::INFINITY;
        }
        return along.abs() / trace.sqrt();
    }
    let d2 = (syy * delta.re * delta.re - 2.0 * sxy * delta.re * delta.im + sxx * delta.im * delta.im) / det;
    // chi-square(2) tail converted to a two-sided normal quantile
    let tail = (-0.5 * d2).exp();
    if tail <= 0.0 {
        return f64::INFINITY;
    }
    Normal::standard().inverse_cdf(1.0 - 0.5 * tail)
}

/// Goodness of fit of a simulated batch on a grid of arguments.
pub fn gof_from_batch(
    p: &AdmissibleParameters,
    batch: &PathBatch,
    t: f64,
    u_grid: &[ComplexArgument],
    mode: GofMode,
    tol: f64,
) -> Result<GofReport> {
    if mode == GofMode::Stationary {
        require_ergodic(p)?;
    }
    let k = batch.time_index(t)?;
    let hw = 3.0 / (batch.n_paths as f64).sqrt();
    let mut rows = Vec::with_capacity(u_grid.len());
    for u in u_grid {
        let analytic = match mode {
            GofMode::Finite => char_fn(p, &batch.x0, t, u, tol)?,
            GofMode::Stationary => stationary_cf(p, u, tol)?.value,
        };
        let vals = sample(batch, k, u)?;
        let empirical = vals.iter().sum::<Complex64>() / batch.n_paths as f64;
        let z = z_score(&vals, empirical - analytic, 100.0 * tol);
        rows.push(GofRow {
            u: u.as_slice().to_vec(),
            analytic,
            empirical,
            half_width: hw,
            z,
            flagged: z.abs() > FLAG_Z,
        });
    }
    let max_abs_z = rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
    let within = rows.iter().filter(|r| r.z.abs() <= 2.0).count();
    Ok(GofReport {
        mode,
        t,
        n_paths: batch.n_paths,
        seed: batch.seed,
        dt: batch.dt,
        fraction_within_2: if rows.is_empty() {
            1.0
        } else {
            within as f64 / rows.len() as f64
        },
        any_flagged: rows.iter().any(|r| r.flagged),
        max_abs_z,
        rows,
        warnings: batch.warnings.clone(),
    })
}

/// Simulates `n_paths` paths to `t` and compares with the analytic transform.
#[allow(clippy::too_many_arguments)]
pub fn gof_report(
    p: &AdmissibleParameters,
    x0: &[f64],
    t: f64,
    u_grid: &[ComplexArgument],
    n_paths: usize,
    seed: u64,
    dt: f64,
    mode: GofMode,
    tol: f64,
) -> Result<GofReport> {
    if mode == GofMode::Stationary {
        require_ergodic(p)?;
    }
    let batch = simulate_paths_at(p, x0, &[t], dt, n_paths, seed)?;
    gof_from_batch(p, &batch, t, u_grid, mode, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRow {
    pub t: f64,
    pub mean_norm: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub rows: Vec<MomentRow>,
    /// Mean of `E|X_t|` over the last quarter of the recorded times.
    pub plateau: f64,
    pub running_max: f64,
    pub violation: bool,
}

/// `t -> mean |X_t|` with `3 sd / sqrt(n)` bands; flags growth beyond
/// `|x0|`-level plus plateau by more than five half-widths.
pub fn moment_report(batch: &PathBatch) -> MomentReport {
    let n = batch.n_paths.max(1) as f64;
    let rows: Vec<MomentRow> = batch
        .times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let norms: Vec<f64> = (0..batch.n_paths)
                .map(|i| batch.state(i, k).iter().map(|v| v * v).sum::<f64>().sqrt())
                .collect();
            let mean = norms.iter().sum::<f64>() / n;
            let var = norms.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            MomentRow {
                t,
                mean_norm: mean,
                half_width: 3.0 * var.sqrt() / n.sqrt(),
            }
        })
        .collect();
    if rows.is_empty() {
        return MomentReport {
            rows,
            plateau: 0.0,
            running_max: 0.0,
            violation: false,
        };
    }
    let tail_start = rows.len() - (rows.len() / 4).max(1);
    let tail = &rows[tail_start..];
    let plateau = tail.iter().map(|r| r.mean_norm).sum::<f64>() / tail.len() as f64;
    let (running_max, hw) = rows
        .iter()
        .map(|r| (r.mean_norm, r.half_width))
        .fold((f64::NEG_INFINITY, 0.0), |a, b| if b.0 > a.0 { b } else { a });
    let violation = running_max > rows[0].mean_norm + plateau + 5.0 * hw;
    MomentReport {
        rows,
        plateau,
        running_max,
        violation,
    }
}
