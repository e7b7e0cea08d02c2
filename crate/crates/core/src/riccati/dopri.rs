//! Dormand-Prince 5(4) integrator for complex vector fields with PI step
//! control and the method's native 4th-order continuous extension.

use num_complex::Complex64;

use crate::error::{AffineError, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const MAX_STEPS: usize = 2_000_000;

/// Counters reported with every solution.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
    /// Largest unscaled local error estimate over accepted steps.
    pub max_local_error: f64,
}

/// Interpolant of one accepted step on `[t0, t0 + h]`.
#[derive(Debug, Clone)]
pub struct Segment {
    pub t0: f64,
    pub h: f64,
    rcont: [Vec<Complex64>; 5],
}

impl Segment {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64, out: &mut [Complex64]) {
        let th = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let th1 = 1.0 - th;
        let [r1, r2, r3, r4, r5] = &self.rcont;
        for k in 0..out.len() {
            out[k] = r1[k] + (r2[k] + (r3[k] + (r4[k] + r5[k] * th1) * th) * th1) * th;
        }
    }

    /// Value at the right end.
    pub fn end(&self) -> Vec<Complex64> {
        self.rcont[0].iter().zip(&self.rcont[1]).map(|(a, b)| a + b).collect()
    }
}

/// Adaptive integrator state for `y' = f(t, y)`.
pub struct Dopri5<F> {
    f: F,
    t: f64,
    y: Vec<Complex64>,
    k1: Vec<Complex64>,
    h: f64,
    facold: f64,
    last_rejected: bool,
    rtol: f64,
    atol: f64,
    pub stats: StepStats,
}

impl<F> Dopri5<F>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    pub fn new(mut f: F, t0: f64, y0: Vec<Complex64>, rtol: f64, atol: f64) -> Self {
        let mut k1 = vec![Complex64::new(0.0, 0.0); y0.len()];
        f(t0, &y0, &mut k1);
        let mut s = Dopri5 {
            f,
            t: t0,
            y: y0,
            k1,
            h: 0.0,
            facold: 1e-4,
            last_rejected: false,
            rtol,
            atol,
            stats: StepStats {
                rhs_evaluations: 1,
                ..StepStats::default()
            },
        };
        s.h = s.initial_step();
        s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[Complex64] {
        &self.y
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    /// Overrides the next trial step (used when resuming an integration).
    pub fn set_step_size(&mut self, h: f64) {
        if h.is_finite() && h > 0.0 {
            self.h = h;
        }
    }

    fn scale(&self, a: Complex64, b: Complex64) -> f64 {
        self.atol + self.rtol * a.norm().max(b.norm())
    }

    fn rms(&self, v: &[Complex64], reference: &[Complex64]) -> f64 {
        if v.is_empty() {
            return 0.0;
        }
        let s: f64 = v
            .iter()
            .zip(reference)
            .map(|(x, r)| {
                let sc = self.scale(*r, *r);
                (x.norm() / sc).powi(2)
            })
            .sum();
        (s / v.len() as f64).sqrt()
    }

    // Hairer-Wanner starting step heuristic.
    fn initial_step(&mut self) -> f64 {
        let n = self.y.len();
        if n == 0 {
            return 1.0;
        }
        let d0 = self.rms(&self.y.clone(), &self.y.clone());
        let d1 = self.rms(&self.k1.clone(), &self.y.clone());
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1: Vec<Complex64> = self.y.iter().zip(&self.k1).map(|(y, k)| y + k * h0).collect();
        let mut f1 = vec![Complex64::new(0.0, 0.0); n];
        (self.f)(self.t + h0, &y1, &mut f1);
        self.stats.rhs_evaluations += 1;
        let diff: Vec<Complex64> = f1.iter().zip(&self.k1).map(|(a, b)| a - b).collect();
        let d2 = self.rms(&diff, &self.y.clone()) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1)
    }

    /// Takes one accepted step that does not pass `t_end` and returns its interpolant.
    pub fn step(&mut self, t_end: f64) -> Result<Segment> {
        let n = self.y.len();
        let zero = Complex64::new(0.0, 0.0);
        let mut k2 = vec![zero; n];
        let mut k3 = vec![zero; n];
        let mut k4 = vec![zero; n];
        let mut k5 = vec![zero; n];
        let mut k6 = vec![zero; n];
        let mut k7 = vec![zero; n];
        let mut ys = vec![zero; n];
        let mut y1 = vec![zero; n];
        loop {
            if self.stats.accepted + self.stats.rejected > MAX_STEPS {
                return Err(AffineError::SolverFailure {
                    t_reached: self.t,
                    reason: "step budget exhausted".into(),
                });
            }
            let remaining = t_end - self.t;
            let mut h = self.h.min(remaining);
            // avoid a sliver step at the end
            if remaining - h < 1e-12 * remaining.abs().max(1.0) || h > remaining {
                h = remaining;
            }
            if h <= 1e-14 * self.t.abs().max(1.0) || !h.is_finite() {
                return Err(AffineError::SolverFailure {
                    t_reached: self.t,
                    reason: format!("step size underflow (h = {h:e})"),
                });
            }
            let (t, y, k1) = (self.t, &self.y, &self.k1);
            for i in 0..n {
                ys[i] = y[i] + k1[i] * (h * A21);
            }
            (self.f)(t + C2 * h, &ys, &mut k2);
            for i in 0..n {
                ys[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * h;
            }
            (self.f)(t + C3 * h, &ys, &mut k3);
            for i in 0..n {
                ys[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * h;
            }
            (self.f)(t + C4 * h, &ys, &mut k4);
            for i in 0..n {
                ys[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * h;
            }
            (self.f)(t + C5 * h, &ys, &mut k5);
            for i in 0..n {
                ys[i] = y[i] + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * h;
            }
            (self.f)(t + h, &ys, &mut k6);
            for i in 0..n {
                y1[i] = y[i] + (k1[i] * A71 + k3[i] * A73 + k4[i] * A74 + k5[i] * A75 + k6[i] * A76) * h;
            }
            (self.f)(t + h, &y1, &mut k7);
            self.stats.rhs_evaluations += 6;

            let mut err_sum = 0.0;
            let mut err_abs: f64 = 0.0;
            let mut finite = true;
            for i in 0..n {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
                if !(y1[i].re.is_finite() && y1[i].im.is_finite() && e.re.is_finite() && e.im.is_finite()) {
                    finite = false;
                }
                let sc = self.scale(y[i], y1[i]);
                err_sum += (e.norm() / sc).powi(2);
                err_abs = err_abs.max(e.norm());
            }
            let err = if n == 0 { 0.0 } else { (err_sum / n as f64).sqrt() };
            if !finite || !err.is_finite() {
                self.stats.rejected += 1;
                self.h = h * FAC_MIN;
                self.last_rejected = true;
                continue;
            }
            let fac11 = err.powf(0.2 - BETA * 0.75);
            if err <= 1.0 {
                let mut fac = fac11 / self.facold.powf(BETA);
                fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let mut h_new = h / fac;
                if self.last_rejected {
                    h_new = h_new.min(h);
                }
                self.facold = err.max(1e-4);
                self.last_rejected = false;

                let mut r5 = vec![zero; n];
                let mut r2 = vec![zero; n];
                let mut r3 = vec![zero; n];
                let mut r4 = vec![zero; n];
                for i in 0..n {
                    r2[i] = y1[i] - y[i];
                    r3[i] = k1[i] * h - r2[i];
                    r4[i] = r2[i] - k7[i] * h - r3[i];
                    r5[i] = (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * h;
                }
                let seg = Segment {
                    t0: t,
                    h,
                    rcont: [y.clone(), r2, r3, r4, r5],
                };
                self.stats.accepted += 1;
                self.stats.max_local_error = self.stats.max_local_error.max(err_abs);
                self.t = if (t_end - (t + h)).abs() <= 1e-12 * t_end.abs().max(1.0) {
                    t_end
                } else {
                    t + h
                };
                std::mem::swap(&mut self.y, &mut y1);
                std::mem::swap(&mut self.k1, &mut k7);
                // keep the step the controller wanted even if we clipped to t_end
                if h < self.h && h == remaining {
                    self.h = self.h.max(h_new);
                } else {
                    self.h = h_new;
                }
                return Ok(seg);
            }
            self.stats.rejected += 1;
            self.h = h / (1.0 / FAC_MIN).min(fac11 / SAFETY);
            self.last_rejected = true;
        }
    }

    /// Replaces the current state (for projections) and refreshes the FSAL stage.
    pub fn set_state(&mut self, y: Vec<Complex64>) {
        self.y = y;
        (self.f)(self.t, &self.y, &mut self.k1);
        self.stats.rhs_evaluations += 1;
    }
}
