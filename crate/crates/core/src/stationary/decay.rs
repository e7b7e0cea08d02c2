use serde::Serialize;

use super::ergodicity::require_ergodic;
use crate::error::{AffineError, Result};
use crate::model::{AdmissibleParameters, ComplexArgument};
use crate::riccati::{solve_psi, SolveOptions};

const SAMPLES: usize = 65;
const SOLVE_TOL: f64 = 1e-12;

/// Least-squares fit `log |psi(t,u)| ~ log c1 - c2 t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub c1: f64,
    pub c2: f64,
    pub r_squared: f64,
    /// `r_squared >= 0.99`.
    pub reliable: bool,
}

/// Returns `(intercept, slope)`.
pub(crate) fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

pub fn decay_rate_fit(p: &AdmissibleParameters, u: &ComplexArgument, window: (f64, f64)) -> Result<DecayFit> {
    let (lo, hi) = window;
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        return Err(AffineError::InvalidInput(format!("bad fit window [{lo}, {hi}]")));
    }
    if u.is_zero() {
        return Err(AffineError::Degenerate(
            "psi(t, 0) = 0 for all t; use spectral_abscissa for the decay rate".into(),
        ));
    }
    require_ergodic(p)?;
    let mut opts = SolveOptions::new(SOLVE_TOL);
    opts.stops = vec![lo];
    let sol = solve_psi(p, u, hi, &opts)?;
    let mut pts = Vec::with_capacity(SAMPLES);
    for k in 0..SAMPLES {
        let t = lo + (hi - lo) * k as f64 / (SAMPLES - 1) as f64;
        let r = sol.psi_at(t)?.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if r > 0.0 {
            pts.push((t, r.ln()));
        }
    }
    if pts.len() < 3 {
        return Err(AffineError::Degenerate("psi vanishes on the fit window".into()));
    }
    let (icpt, slope) = least_squares(&pts);
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(DecayFit {
        c1: icpt.exp(),
        c2: -slope,
        r_squared,
        reliable: r_squared >= 0.99,
    })
}
