//! Limiting distribution: ergodicity hypotheses, the stationary characteristic
//! function, decay diagnostics, Lyapunov machinery and 1-D density inversion.

mod decay;
mod density;
mod ergodicity;
mod lyapunov;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{AffineError, Result};
use crate::model::{AdmissibleParameters, ComplexArgument, RadialQuery};
use crate::riccati::{solve_psi, RiccatiSolution, SolveOptions};

pub use decay::{decay_rate_fit, DecayFit};
pub use density::{invert_density_1d, DensityGrid, DensityInversion};
pub use ergodicity::{
    check_ergodicity, require_ergodic, spectral_abscissa, ErgodicityReport, REASON_LOG_MOMENT, REASON_SPECTRAL,
};
pub use lyapunov::{drift_certificate, eval_v, generator_apply_v, lyapunov_gram, DriftCertificate, LyapunovData};

/// Doublings of the starting horizon before giving up.
const MAX_DOUBLINGS: u32 = 10;
const WINDOW_SAMPLES: usize = 33;

/// `pi^(u) = exp(int_0^T F(psi(s,u)) ds)` with the horizon `T` chosen adaptively.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryCf {
    pub value: Complex64,
    /// `int_0^T F(psi(s,u)) ds`.
    pub exponent: Complex64,
    /// Estimated bound on `|int_T^inf F(psi(s,u)) ds|`.
    pub tail_bound: f64,
    pub horizon: f64,
    /// Decay rate used for the tail model.
    pub decay_rate: f64,
}

/// Norm data of `F` used by the tail model.
struct TailModel {
    a_norm: f64,
    b_norm: f64,
    // sum_{|xi| <= 1} w |xi|^2 and sum_{|xi| <= 1} w |xi_I|
    small_second: f64,
    small_i: f64,
}

impl TailModel {
    fn new(p: &AdmissibleParameters) -> Self {
        let m = p.dims.m;
        let mut small_second = 0.0;
        let mut small_i = 0.0;
        for atom in p.nu.atoms().iter().filter(|a| a.radius() <= 1.0) {
            small_second += atom.weight * atom.radius().powi(2);
            small_i += atom.weight * atom.location[..m].iter().map(|x| x * x).sum::<f64>().sqrt();
        }
        TailModel {
            a_norm: p.a.norm(),
            b_norm: p.b.norm(),
            small_second,
            small_i,
        }
    }

    /// Bound on `int_T^inf |F(psi(s))| ds` given `|psi(s)| <= r e^{-c (s - T)}`.
    ///
    /// Small jumps use `|e^z - 1 - z| <= |z|^2 / 2`; big jumps use
    /// `|e^z - 1| <= min(2, |z|)`, whose time integral is `g / c` for
    /// `g = r |xi| <= 2` and `(2 / c)(log(g / 2) + 1)` above.
    fn bound(&self, p: &AdmissibleParameters, r: f64, c: f64) -> f64 {
        let poly = self.b_norm * r / c + self.a_norm * r * r / (2.0 * c);
        let small = self.small_second * r * r / (4.0 * c) + self.small_i * r / c;
        let split = (2.0 / r).max(1.0);
        let nu = &p.nu;
        let linear = nu.shell(RadialQuery::FirstMoment, 1.0, split).value() * r / c;
        let logs = (2.0 / c)
            * ((1.0 + (r / 2.0).ln()) * nu.mass_beyond(split).value()
                + nu.shell(RadialQuery::LogMoment, split, f64::INFINITY).value());
        poly + small + linear + logs.max(0.0)
    }
}

/// Fits `|psi(s)| <= r e^{-c (s - T)}` on `[T/2, T]`; `None` when no decay is visible.
fn envelope(sol: &RiccatiSolution, horizon: f64, rate_cap: f64) -> Result<Option<(f64, f64)>> {
    let lo = 0.5 * horizon;
    let mut ts = Vec::with_capacity(WINDOW_SAMPLES);
    let mut rs = Vec::with_capacity(WINDOW_SAMPLES);
    for k in 0..WINDOW_SAMPLES {
        let t = lo + (horizon - lo) * k as f64 / (WINDOW_SAMPLES - 1) as f64;
        let r = sol.psi_at(t)?.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        ts.push(t);
        rs.push(r);
    }
    if rs.iter().all(|&r| r == 0.0) {
        return Ok(Some((0.0, rate_cap)));
    }
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(&rs)
        .filter(|(_, r)| **r > 0.0)
        .map(|(t, r)| (*t, r.ln()))
        .collect();
    if pts.len() < 2 {
        return Ok(None);
    }
    let slope = decay::least_squares(&pts).1;
    if !(slope < 0.0) {
        return Ok(None);
    }
    let c = (-slope).min(rate_cap);
    let r = ts
        .iter()
        .zip(&rs)
        .map(|(t, r)| r * (c * (t - horizon)).exp())
        .fold(0.0, f64::max);
    Ok(Some((r, c)))
}

/// `pi^(u)` for an ergodic model, accurate to about `tol`.
pub fn stationary_cf(p: &AdmissibleParameters, u: &ComplexArgument, tol: f64) -> Result<StationaryCf> {
    let report = require_ergodic(p)?;
    if u.as_slice().len() != p.dims.d() {
        return Err(AffineError::Dimension(format!(
            "argument has {} entries, model has d = {}",
            u.as_slice().len(),
            p.dims.d()
        )));
    }
    if u.is_zero() {
        return Ok(StationaryCf {
            value: Complex64::new(1.0, 0.0),
            exponent: Complex64::new(0.0, 0.0),
            tail_bound: 0.0,
            horizon: 0.0,
            decay_rate: -report.spectral_abscissa,
        });
    }
    let kappa = -report.spectral_abscissa;
    let t0 = 10.0 / kappa;
    let cap = t0 * f64::from(1u32 << MAX_DOUBLINGS);
    let model = TailModel::new(p);
    let mut horizon = t0;
    let mut sol = solve_psi(p, u, horizon, &SolveOptions::new(tol))?;
    loop {
        let (tail, rate) = match envelope(&sol, horizon, kappa)? {
            Some((0.0, c)) => (0.0, c),
            Some((r, c)) => (model.bound(p, r, c), c),
            None => (f64::INFINITY, 0.0),
        };
        if tail <= tol {
            let exponent = sol.phi_at(horizon)?;
            return Ok(StationaryCf {
                value: exponent.exp(),
                exponent,
                tail_bound: tail,
                horizon,
                decay_rate: rate,
            });
        }
        if horizon >= cap {
            return Err(AffineError::NonConvergence {
                horizon,
                tail_bound: tail,
                tol,
            });
        }
        horizon *= 2.0;
        sol.extend_to(horizon)?;
    }
}

/// `exp(int_0^T F(psi(s,u)) ds)` at a fixed horizon (no tail control).
pub fn stationary_cf_at_horizon(
    p: &AdmissibleParameters,
    u: &ComplexArgument,
    horizon: f64,
    tol: f64,
) -> Result<Complex64> {
    let sol = solve_psi(p, u, horizon, &SolveOptions::new(tol))?;
    Ok(sol.phi_at(horizon)?.exp())
}

/// [`stationary_cf`] over many arguments in parallel.
pub fn stationary_cf_batch(
    p: &AdmissibleParameters,
    us: &[ComplexArgument],
    tol: f64,
) -> Result<Vec<Result<StationaryCf>>> {
    require_ergodic(p)?;
    Ok(us.par_iter().map(|u| stationary_cf(p, u, tol)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Dimensions, LevyMeasure};
    use nalgebra::DMatrix;

    fn cir() -> AdmissibleParameters {
        let d = Dimensions::new(1, 0).unwrap();
        let mut p = AdmissibleParameters::zero(d);
        p.alpha[0][(0, 0)] = 1.0;
        p.beta[(0, 0)] = -1.0;
        p.b[0] = 1.0;
        p
    }

    #[test]
    fn zero_argument_is_one() {
        let p = cir();
        let r = stationary_cf(&p, &ComplexArgument::zero(p.dims), 1e-8).unwrap();
        assert_eq!(r.value, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn cir_gamma_transform() {
        let p = cir();
        let u = ComplexArgument::new(p.dims, vec![Complex64::new(-1.0, 0.0)]).unwrap();
        let r = stationary_cf(&p, &u, 1e-9).unwrap();
        assert!((r.value.re - 0.5).abs() < 1e-8, "{r:?}");
        assert!(r.tail_bound <= 1e-9);
    }

    #[test]
    fn gaussian_ou() {
        let d = Dimensions::new(0, 1).unwrap();
        let mut p = AdmissibleParameters::zero(d);
        p.a[(0, 0)] = 0.5;
        p.beta[(0, 0)] = -1.0;
        let u = ComplexArgument::imaginary(d, &[1.0]).unwrap();
        let r = stationary_cf(&p, &u, 1e-10).unwrap();
        assert!((r.value - Complex64::new((-0.25f64).exp(), 0.0)).norm() < 1e-9, "{r:?}");
    }

    #[test]
    fn not_ergodic_is_an_error() {
        let mut p = cir();
        p.beta[(0, 0)] = 0.0;
        let u = ComplexArgument::new(p.dims, vec![Complex64::new(-1.0, 0.0)]).unwrap();
        assert!(matches!(
            stationary_cf(&p, &u, 1e-8),
            Err(AffineError::NotErgodic { .. })
        ));
    }

    #[test]
    fn doubling_the_horizon_stays_within_tail_bound() {
        let d = Dimensions::new(1, 1).unwrap();
        let mut p = AdmissibleParameters::zero(d);
        p.alpha[0][(0, 0)] = 0.5;
        p.alpha[0][(1, 1)] = 0.3;
        p.a[(1, 1)] = 0.2;
        p.b[0] = 0.7;
        p.beta = DMatrix::from_row_slice(2, 2, &[-0.8, 0.0, 0.5, -1.2]);
        p.nu = LevyMeasure::atomic(d, vec![(vec![0.3, -0.4], 1.0), (vec![2.0, 1.0], 0.2)]).unwrap();
        let u = ComplexArgument::new(d, vec![Complex64::new(-0.3, 1.0), Complex64::new(0.0, -2.0)]).unwrap();
        let r = stationary_cf(&p, &u, 1e-8).unwrap();
        let doubled = stationary_cf_at_horizon(&p, &u, 2.0 * r.horizon, 1e-8).unwrap();
        assert!((doubled - r.value).norm() <= r.tail_bound + 1e-7, "{r:?} vs {doubled}");
        assert!(r.value.norm() <= 1.0);
    }
}
