use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{AffineError, Result};

const CF_ZERO_TOL: f64 = 1e-8;
/// Relative residual above which the endpoint fit is discarded.
const FIT_ACCEPT: f64 = 1e-2;

/// `points` equispaced abscissae on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl DensityGrid {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) || points < 2 {
            return Err(AffineError::InvalidInput(format!(
                "density grid needs lo < hi and at least 2 points, got [{lo}, {hi}] x {points}"
            )));
        }
        Ok(DensityGrid { lo, hi, points })
    }

    pub fn abscissae(&self) -> Vec<f64> {
        let h = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points).map(|j| self.lo + h * j as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityInversion {
    pub x: Vec<f64>,
    pub density: Vec<f64>,
    /// Mass of each grid cell `[x_j, x_{j+1}]` under the truncated series.
    pub cell_mass: Vec<f64>,
    /// Estimate of the series truncation error from the last coefficients.
    pub truncation_error: f64,
    /// Whether the endpoint-derivative correction was applied.
    pub corrected: bool,
}

/// Fits `y_k = A_k k^2 pi^2 / (2L)` on the upper half of the spectrum to the
/// leading asymptotics of a cosine series with endpoint slopes `D0`, `DL`.
fn endpoint_slopes(a: &[f64], len: f64) -> Option<(f64, f64)> {
    let n = a.len();
    let ks: Vec<usize> = (n / 2..n).filter(|&k| k > 0).collect();
    if ks.len() < 8 {
        return None;
    }
    let mut x = DMatrix::zeros(ks.len(), 4);
    let mut y = DVector::zeros(ks.len());
    for (row, &k) in ks.iter().enumerate() {
        let kf = k as f64;
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        let r = (len / (kf * PI)).powi(2);
        x[(row, 0)] = s;
        x[(row, 1)] = -1.0;
        x[(row, 2)] = s * r;
        x[(row, 3)] = -r;
        y[row] = a[k] * kf * kf * PI * PI / (2.0 * len);
    }
    let coef = x.clone().svd(true, true).solve(&y, 1e-14).ok()?;
    let resid = (&x * &coef - &y).norm();
    let scale = y.norm();
    if scale == 0.0 || resid > FIT_ACCEPT * scale {
        return None;
    }
    Some((coef[1], coef[0]))
}

/// Cosine-series inversion of a characteristic function `cf(s) = E exp(i s X)`
/// on the grid interval, with an endpoint correction for densities that do
/// not vanish smoothly at the interval ends.
pub fn invert_density_1d<F>(cf: F, grid: DensityGrid, terms: usize) -> Result<DensityInversion>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let grid = DensityGrid::new(grid.lo, grid.hi, grid.points)?;
    if terms < 2 {
        return Err(AffineError::InvalidInput("need at least 2 series terms".into()));
    }
    let at0 = cf(0.0);
    if (at0 - 1.0).norm() > CF_ZERO_TOL {
        return Err(AffineError::InvalidInput(format!("cf(0) = {at0}, expected 1")));
    }
    let (lo, len) = (grid.lo, grid.hi - grid.lo);
    let a: Vec<f64> = (0..terms)
        .into_par_iter()
        .map(|k| {
            let w = k as f64 * PI / len;
            2.0 / len * (cf(w) * Complex64::new(0.0, -w * lo).exp()).re
        })
        .collect();
    let slopes = endpoint_slopes(&a, len);
    let (d0, dl) = slopes.unwrap_or((0.0, 0.0));
    let mut c = a;
    if slopes.is_some() {
        c[0] -= 2.0 / len * (d0 * len * len / 2.0 - (d0 - dl) * len * len / 6.0);
        for (k, ck) in c.iter_mut().enumerate().skip(1) {
            let kf = k as f64;
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            *ck -= 2.0 * len / (kf * kf * PI * PI) * (s * dl - d0);
        }
    }
    c[0] *= 0.5;

    let poly = |t: f64| d0 * t - (d0 - dl) * t * t / (2.0 * len);
    let poly_int = |t: f64| d0 * t * t / 2.0 - (d0 - dl) * t.powi(3) / (6.0 * len);
    let x = grid.abscissae();
    let (density, antideriv): (Vec<f64>, Vec<f64>) = x
        .par_iter()
        .map(|&xj| {
            let t = xj - lo;
            let mut f = poly(t) + c[0];
            let mut g = poly_int(t) + c[0] * t;
            for (k, ck) in c.iter().enumerate().skip(1) {
                let w = k as f64 * PI / len;
                let (s, co) = (w * t).sin_cos();
                f += ck * co;
                g += ck * s / w;
            }
            (f, g)
        })
        .unzip();
    let cell_mass = antideriv.windows(2).map(|w| w[1] - w[0]).collect();
    let tail = c[terms - 1].abs().max(c[terms - 2].abs());
    Ok(DensityInversion {
        x,
        density,
        cell_mass,
        truncation_error: terms as f64 * tail / 3.0,
        corrected: slopes.is_some(),
    })
}
