//! Generalized Riccati equations: `psi^J` in closed form, `psi^I` by an
//! adaptive Dormand-Prince solve, `phi` by quadrature of `F(psi)`.

pub mod dopri;

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{AffineError, Result};
use crate::functionals::{f_unchecked, ri_unchecked};
use crate::linalg::expm;
use crate::model::{AdmissibleParameters, ComplexArgument, LevyMeasure};
use crate::quad;
pub use dopri::StepStats;
use dopri::{Dopri5, Segment};

/// Round-off allowance for `Re psi_i <= 0`, `i in I`.
pub const TOL_DOMAIN: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Absolute error floor relative to the step tolerance.
const ATOL_FACTOR: f64 = 1e-6;

/// Everything the right-hand side needs, shared between solves and extensions.
struct Rhs {
    params: AdmissibleParameters,
    mu: Vec<LevyMeasure>,
    bjj_t: DMatrix<f64>,
    w: Vec<Complex64>,
}

impl Rhs {
    fn psi_j(&self, t: f64, out: &mut [Complex64]) {
        let n = self.w.len();
        if n == 0 {
            return;
        }
        if t == 0.0 {
            out.copy_from_slice(&self.w);
            return;
        }
        let e = expm(&self.bjj_t, t);
        for (r, o) in out.iter_mut().enumerate().take(n) {
            let mut acc = ZERO;
            for c in 0..n {
                acc += self.w[c] * e[(r, c)];
            }
            *o = acc;
        }
    }

    fn eval(&self, t: f64, y: &[Complex64], out: &mut [Complex64]) {
        let m = self.params.dims.m;
        let mut u = vec![ZERO; self.params.dims.d()];
        u[..m].copy_from_slice(y);
        self.psi_j(t, &mut u[m..]);
        ri_unchecked(&self.params, &self.mu, &u, out);
    }
}

/// `psi` and `phi` on an adaptive time grid, with dense output in between.
pub struct RiccatiSolution {
    rhs: Arc<Rhs>,
    u0: ComplexArgument,
    tol: f64,
    times: Vec<f64>,
    psi: Vec<Vec<Complex64>>,
    phi: Vec<Complex64>,
    segments: Vec<Segment>,
    next_step: f64,
    stats: StepStats,
}

impl std::fmt::Debug for RiccatiSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RiccatiSolution")
            .field("u0", &self.u0)
            .field("horizon", &self.horizon())
            .field("grid_points", &self.times.len())
            .field("stats", &self.stats)
            .finish()
    }
}

/// Solver settings; `tol` controls both the ODE steps and the `phi` quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    /// Replace every `mu_i` by its restriction to `{|xi| <= K}`.
    pub truncation: Option<f64>,
    /// Times the step sequence must hit exactly.
    pub stops: Vec<f64>,
}

impl SolveOptions {
    pub fn new(tol: f64) -> Self {
        SolveOptions {
            tol,
            truncation: None,
            stops: Vec::new(),
        }
    }
}

/// Solves the Riccati system from `u` on `[0, horizon]`.
pub fn solve_psi(
    p: &AdmissibleParameters,
    u: &ComplexArgument,
    horizon: f64,
    opts: &SolveOptions,
) -> Result<RiccatiSolution> {
    if u.as_slice().len() != p.dims.d() {
        return Err(AffineError::Dimension(format!(
            "argument has {} entries, model has d = {}",
            u.as_slice().len(),
            p.dims.d()
        )));
    }
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(AffineError::InvalidInput(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(AffineError::InvalidInput(format!(
            "horizon must be finite and >= 0, got {horizon}"
        )));
    }
    let mu = match opts.truncation {
        Some(k) => crate::model::truncate_levy(&p.mu, k)?.0,
        None => p.mu.clone(),
    };
    let rhs = Arc::new(Rhs {
        params: p.clone(),
        mu,
        bjj_t: p.beta_jj().transpose(),
        w: u.w().to_vec(),
    });
    let mut sol = RiccatiSolution {
        rhs,
        u0: u.clone(),
        tol: opts.tol,
        times: vec![0.0],
        psi: vec![u.as_slice().to_vec()],
        phi: vec![ZERO],
        segments: Vec::new(),
        next_step: f64::NAN,
        stats: StepStats::default(),
    };
    let mut stops: Vec<f64> = opts.stops.iter().cloned().filter(|&s| s > 0.0 && s < horizon).collect();
    stops.sort_by(|a, b| a.partial_cmp(b).unwrap());
    stops.dedup();
    for s in stops {
        sol.extend_to(s)?;
    }
    sol.extend_to(horizon)?;
    Ok(sol)
}

/// Solves for many arguments in parallel.
pub fn solve_batch(
    p: &AdmissibleParameters,
    us: &[ComplexArgument],
    horizon: f64,
    opts: &SolveOptions,
) -> Vec<Result<RiccatiSolution>> {
    us.par_iter().map(|u| solve_psi(p, u, horizon, opts)).collect()
}

impl RiccatiSolution {
    pub fn u0(&self) -> &ComplexArgument {
        &self.u0
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// `psi` at the grid times.
    pub fn psi_grid(&self) -> &[Vec<Complex64>] {
        &self.psi
    }

    /// `phi` at the grid times.
    pub fn phi_grid(&self) -> &[Complex64] {
        &self.phi
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    fn m(&self) -> usize {
        self.rhs.params.dims.m
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0 && t <= self.horizon()) {
            return Err(AffineError::Domain(format!(
                "t = {t} outside the solved range [0, {}]",
                self.horizon()
            )));
        }
        Ok(())
    }

    fn interval_of(&self, t: f64) -> usize {
        let k = self.times.partition_point(|&s| s <= t);
        k.saturating_sub(1).min(self.times.len().saturating_sub(2))
    }

    fn psi_into(&self, t: f64, out: &mut [Complex64]) {
        let m = self.m();
        if m > 0 {
            if self.segments.is_empty() {
                out[..m].copy_from_slice(&self.psi[0][..m]);
            } else {
                let k = self.interval_of(t);
                self.segments[k].eval(t, &mut out[..m]);
            }
        }
        self.rhs.psi_j(t, &mut out[m..]);
    }

    /// `psi(t)` by dense output; exact at grid times.
    pub fn psi_at(&self, t: f64) -> Result<Vec<Complex64>> {
        self.check_time(t)?;
        if let Ok(k) = self.times.binary_search_by(|s| s.partial_cmp(&t).unwrap()) {
            return Ok(self.psi[k].clone());
        }
        let mut out = vec![ZERO; self.rhs.params.dims.d()];
        self.psi_into(t, &mut out);
        Ok(out)
    }

    /// `psi(t)` as a point of `U`, with round-off excursions projected away.
    pub fn psi_argument(&self, t: f64) -> Result<ComplexArgument> {
        ComplexArgument::projected(self.rhs.params.dims, self.psi_at(t)?)
    }

    fn f_along(&self, s: f64) -> Complex64 {
        let mut u = vec![ZERO; self.rhs.params.dims.d()];
        self.psi_into(s, &mut u);
        f_unchecked(&self.rhs.params, &u)
    }

    fn phi_piece(&self, a: f64, b: f64) -> Complex64 {
        if b <= a {
            return ZERO;
        }
        quad::integrate(|s| self.f_along(s), a, b, self.tol * 1e-2 * (b - a)).value
    }

    /// `phi(t) = int_0^t F(psi(s)) ds`.
    pub fn phi_at(&self, t: f64) -> Result<Complex64> {
        self.check_time(t)?;
        let k = self.times.partition_point(|&s| s <= t).saturating_sub(1);
        Ok(self.phi[k] + self.phi_piece(self.times[k], t))
    }

    /// `int_a^b F(psi(s)) ds` for `0 <= a <= b <= horizon`.
    pub fn f_integral(&self, a: f64, b: f64) -> Result<Complex64> {
        Ok(self.phi_at(b)? - self.phi_at(a)?)
    }

    /// `exp(phi(t) + <x, psi(t)>)`.
    pub fn transform(&self, x: &[f64], t: f64) -> Result<Complex64> {
        let psi = self.psi_at(t)?;
        let lin: Complex64 = psi.iter().zip(x).map(|(p, xi)| p * *xi).sum();
        Ok((self.phi_at(t)? + lin).exp())
    }

    /// Continues the solution up to `horizon`.
    pub fn extend_to(&mut self, horizon: f64) -> Result<()> {
        let t_start = self.horizon();
        if horizon <= t_start {
            return Ok(());
        }
        let m = self.m();
        if m == 0 {
            return self.extend_linear(horizon);
        }
        let rhs = Arc::clone(&self.rhs);
        let f = move |t: f64, y: &[Complex64], out: &mut [Complex64]| rhs.eval(t, y, out);
        let y0 = self.psi.last().unwrap()[..m].to_vec();
        let rtol = self.tol;
        let mut ode = Dopri5::new(f, t_start, y0, rtol, rtol * ATOL_FACTOR);
        if self.next_step.is_finite() {
            ode.set_step_size(self.next_step);
        }
        let base = self.stats;
        let mut result = Ok(());
        while ode.t() < horizon {
            let seg = match ode.step(horizon) {
                Ok(s) => s,
                Err(e) => {
                    result = Err(e);
                    break;
                }
            };
            let t1 = ode.t();
            let mut y = ode.y().to_vec();
            let mut projected = false;
            for (i, v) in y.iter_mut().enumerate() {
                if v.re > TOL_DOMAIN {
                    if v.re <= 10.0 * TOL_DOMAIN {
                        v.re = 0.0;
                        projected = true;
                    } else {
                        result = Err(AffineError::DomainViolation {
                            t: t1,
                            index: i + 1,
                            value: v.re,
                        });
                        break;
                    }
                }
            }
            if result.is_err() {
                break;
            }
            if projected {
                ode.set_state(y.clone());
            }
            let mut full = vec![ZERO; self.rhs.params.dims.d()];
            full[..m].copy_from_slice(&y);
            self.rhs.psi_j(t1, &mut full[m..]);
            let t0 = *self.times.last().unwrap();
            self.times.push(t1);
            self.psi.push(full);
            self.segments.push(seg);
            let piece = self.phi_piece(t0, t1);
            let last = *self.phi.last().unwrap();
            self.phi.push(last + piece);
        }
        self.next_step = ode.step_size();
        let s = ode.stats;
        self.stats = StepStats {
            accepted: base.accepted + s.accepted,
            rejected: base.rejected + s.rejected,
            rhs_evaluations: base.rhs_evaluations + s.rhs_evaluations,
            max_local_error: base.max_local_error.max(s.max_local_error),
        };
        result
    }

    // m = 0: psi is e^{beta_JJ^T t} w everywhere; the grid only carries phi.
    fn extend_linear(&mut self, horizon: f64) -> Result<()> {
        let norm = self.rhs.bjj_t.norm().max(1.0);
        let max_len = 1.0 / norm;
        let t_start = self.horizon();
        let pieces = ((horizon - t_start) / max_len).ceil().max(1.0) as usize;
        let d = self.rhs.params.dims.d();
        for k in 1..=pieces {
            let t1 = if k == pieces {
                horizon
            } else {
                t_start + (horizon - t_start) * k as f64 / pieces as f64
            };
            let t0 = *self.times.last().unwrap();
            let mut full = vec![ZERO; d];
            self.rhs.psi_j(t1, &mut full);
            let piece = self.phi_piece(t0, t1);
            let last = *self.phi.last().unwrap();
            self.times.push(t1);
            self.psi.push(full);
            self.phi.push(last + piece);
            self.stats.accepted += 1;
        }
        Ok(())
    }
}

/// `phi(t, u)`.
pub fn eval_phi(p: &AdmissibleParameters, u: &ComplexArgument, t: f64, tol: f64) -> Result<Complex64> {
    solve_psi(p, u, t, &SolveOptions::new(tol))?.phi_at(t)
}

fn check_state(p: &AdmissibleParameters, x: &[f64]) -> Result<()> {
    if x.len() != p.dims.d() {
        return Err(AffineError::Dimension(format!(
            "state has {} entries, model has d = {}",
            x.len(),
            p.dims.d()
        )));
    }
    if !p.dims.contains(x) {
        return Err(AffineError::Domain("state lies outside D".into()));
    }
    Ok(())
}

/// `E_x[e^{<u, X_t>}] = exp(phi(t,u) + <x, psi(t,u)>)`.
pub fn char_fn(p: &AdmissibleParameters, x: &[f64], t: f64, u: &ComplexArgument, tol: f64) -> Result<Complex64> {
    check_state(p, x)?;
    solve_psi(p, u, t, &SolveOptions::new(tol))?.transform(x, t)
}

/// `char_fn` over many arguments in parallel.
pub fn char_fn_batch(
    p: &AdmissibleParameters,
    x: &[f64],
    t: f64,
    us: &[ComplexArgument],
    tol: f64,
) -> Result<Vec<Result<Complex64>>> {
    check_state(p, x)?;
    Ok(us
        .par_iter()
        .map(|u| solve_psi(p, u, t, &SolveOptions::new(tol))?.transform(x, t))
        .collect())
}

/// Residuals of `psi(t+s,u) = psi(s, psi(t,u))` and
/// `phi(t+s,u) = phi(t,u) + phi(s, psi(t,u))`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SemiflowResidual {
    pub psi: f64,
    pub phi: f64,
}

impl SemiflowResidual {
    pub fn max(&self) -> f64 {
        self.psi.max(self.phi)
    }
}

pub fn semiflow_residual(
    p: &AdmissibleParameters,
    u: &ComplexArgument,
    t: f64,
    s: f64,
    tol: f64,
) -> Result<SemiflowResidual> {
    if s == 0.0 {
        return Ok(SemiflowResidual { psi: 0.0, phi: 0.0 });
    }
    let mut opts = SolveOptions::new(tol);
    opts.stops = vec![t];
    let long = solve_psi(p, u, t + s, &opts)?;
    let mid = long.psi_argument(t)?;
    let short = solve_psi(p, &mid, s, &SolveOptions::new(tol))?;
    let a = long.psi_at(t + s)?;
    let b = short.psi_at(s)?;
    let psi = a.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let phi = (long.phi_at(t + s)? - long.phi_at(t)? - short.phi_at(s)?).norm();
    Ok(SemiflowResidual { psi, phi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Dimensions;
    use nalgebra::DVector;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cir(alpha: f64, lambda: f64, b: f64) -> AdmissibleParameters {
        let d = Dimensions::new(1, 0).unwrap();
        let mut p = AdmissibleParameters::zero(d);
        p.alpha[0][(0, 0)] = alpha;
        p.beta[(0, 0)] = -lambda;
        p.b = DVector::from_vec(vec![b]);
        p
    }

    fn cir_psi(t: f64, v: f64) -> f64 {
        let e = (-t).exp();
        v * e / (1.0 - v * (1.0 - e))
    }

    #[test]
    fn ou_psi_is_exponential() {
        let d = Dimensions::new(0, 1).unwrap();
        let mut p = AdmissibleParameters::zero(d);
        p.beta[(0, 0)] = -1.0;
        let u = ComplexArgument::imaginary(d, &[1.0]).unwrap();
        let sol = solve_psi(&p, &u, 1.0, &SolveOptions::new(1e-10)).unwrap();
        let psi = sol.psi_at(1.0).unwrap()[0];
        assert!((psi - c(0.0, (-1.0f64).exp())).norm() < 1e-15);
        assert_eq!(sol.psi_at(0.0).unwrap(), u.as_slice());
        assert_eq!(sol.phi_at(0.0).unwrap(), ZERO);
    }

    #[test]
    fn cir_psi_matches_closed_form() {
        let p = cir(1.0, 1.0, 1.0);
        let d = p.dims;
        let u = ComplexArgument::new(d, vec![c(-1.0, 0.0)]).unwrap();
        let t = 2.0f64.ln();
        let mut opts = SolveOptions::new(1e-10);
        opts.stops = vec![t];
        let sol = solve_psi(&p, &u, 3.0, &opts).unwrap();
        assert!((sol.psi_at(t).unwrap()[0].re + 1.0 / 3.0).abs() < 1e-9);
        for &s in &[0.1, 0.77, 1.5, 2.93] {
            let got = sol.psi_at(s).unwrap()[0];
            assert!((got.re - cir_psi(s, -1.0)).abs() < 1e-9, "t = {s}");
            assert!(got.im.abs() < 1e-15);
        }
        let phi = sol.phi_at(t).unwrap();
        assert!((phi.re + 1.5f64.ln()).abs() < 1e-9);
        let cf = char_fn(&p, &[3.0], t, &u, 1e-10).unwrap();
        assert!((cf.re - (-1.0f64).exp() / 1.5).abs() < 1e-8);
    }

    #[test]
    fn phi_vanishes_without_state_independent_part() {
        let mut p = cir(1.0, 1.0, 0.0);
        p.mu[0] = LevyMeasure::atomic(p.dims, vec![(vec![0.5], 2.0)]).unwrap();
        let u = ComplexArgument::new(p.dims, vec![c(-0.5, 2.0)]).unwrap();
        assert_eq!(eval_phi(&p, &u, 4.0, 1e-9).unwrap(), ZERO);
    }

    #[test]
    fn zero_argument_gives_one() {
        let p = cir(1.0, 1.0, 1.0);
        let u = ComplexArgument::zero(p.dims);
        assert_eq!(char_fn(&p, &[2.0], 5.0, &u, 1e-9).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn time_zero_gives_exponential_of_state() {
        let d = Dimensions::new(1, 1).unwrap();
        let mut p = AdmissibleParameters::zero(d);
        p.beta = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.5, -1.0]);
        let u = ComplexArgument::new(d, vec![c(-0.5, 1.0), c(0.0, 2.0)]).unwrap();
        let cf = char_fn(&p, &[1.5, -1.0], 0.0, &u, 1e-9).unwrap();
        let expect = (c(-0.5, 1.0) * 1.5 + c(0.0, 2.0) * -1.0).exp();
        assert!((cf - expect).norm() < 1e-15);
    }

    #[test]
    fn extension_continues_the_same_solution() {
        let p = cir(1.0, 1.0, 1.0);
        let u = ComplexArgument::new(p.dims, vec![c(-1.0, 0.5)]).unwrap();
        let mut sol = solve_psi(&p, &u, 1.0, &SolveOptions::new(1e-10)).unwrap();
        sol.extend_to(4.0).unwrap();
        let whole = solve_psi(&p, &u, 4.0, &SolveOptions::new(1e-10)).unwrap();
        let a = sol.psi_at(4.0).unwrap()[0];
        let b = whole.psi_at(4.0).unwrap()[0];
        assert!((a - b).norm() < 1e-10);
        assert!((sol.phi_at(4.0).unwrap() - whole.phi_at(4.0).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn semiflow_on_cir() {
        let p = cir(1.0, 1.0, 1.0);
        let u = ComplexArgument::new(p.dims, vec![c(-1.0, 0.0)]).unwrap();
        let tol = 1e-9;
        let r = semiflow_residual(&p, &u, 1.0, 1.0, tol).unwrap();
        assert!(r.max() <= 10.0 * tol, "{r:?}");
        assert_eq!(semiflow_residual(&p, &u, 1.0, 0.0, tol).unwrap().max(), 0.0);
    }

    #[test]
    fn solver_errors() {
        let p = cir(1.0, 1.0, 1.0);
        let u = ComplexArgument::zero(p.dims);
        assert!(matches!(
            solve_psi(&p, &u, 1.0, &SolveOptions::new(0.0)),
            Err(AffineError::InvalidInput(_))
        ));
        assert!(matches!(
            char_fn(&p, &[-1.0], 1.0, &u, 1e-8),
            Err(AffineError::Domain(_))
        ));
    }
}
