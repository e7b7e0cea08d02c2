//! Jump measures on `D \ {0}`: finite weighted atoms plus radial parametric tails.

use std::f64::consts::E;
use std::ops::Add;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Dimensions;
use crate::error::{AffineError, Result};
use crate::quad;

/// A non-negative real number that may be `+inf` for analytic reasons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// The value as an `f64`, with `Infinite` mapped to `f64::INFINITY`.
    pub fn value(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinite => None,
        }
    }

    pub fn scale(self, factor: f64) -> ExtReal {
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(v * factor),
            ExtReal::Infinite if factor == 0.0 => ExtReal::Finite(0.0),
            ExtReal::Infinite => ExtReal::Infinite,
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::Infinite,
        }
    }
}

impl std::iter::Sum for ExtReal {
    fn sum<I: Iterator<Item = ExtReal>>(iter: I) -> ExtReal {
        iter.fold(ExtReal::Finite(0.0), |a, b| a + b)
    }
}

/// Radial integrands supported by the shell queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialQuery {
    /// `1`
    Mass,
    /// `r`
    FirstMoment,
    /// `r^2`
    SecondMoment,
    /// `log r`
    LogMoment,
}

impl RadialQuery {
    fn eval(self, r: f64) -> f64 {
        match self {
            RadialQuery::Mass => 1.0,
            RadialQuery::FirstMoment => r,
            RadialQuery::SecondMoment => r * r,
            RadialQuery::LogMoment => r.ln(),
        }
    }
}

/// A point mass of the jump measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub location: Vec<f64>,
    pub weight: f64,
    norm: f64,
}

impl Atom {
    pub fn new(location: Vec<f64>, weight: f64) -> Self {
        let norm = location.iter().map(|x| x * x).sum::<f64>().sqrt();
        Atom { location, weight, norm }
    }

    /// Euclidean norm of the jump size.
    pub fn radius(&self) -> f64 {
        self.norm
    }
}

/// Radial family of a [`ParametricTail`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailKind {
    /// Pareto-type tail: mass of `{r > s}` equals `scale * s^-index` for `s >= 1`.
    PowerTail { index: f64 },
    /// Radial density `scale / (r log^2 r)` on `r > e`; total mass `scale`,
    /// divergent log-moment.
    LogDivergentTail,
}

/// A radial jump family concentrated on the ray `{r * direction : r > r_min}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricTail {
    kind: TailKind,
    scale: f64,
    direction: Vec<f64>,
    max_radius: f64,
}

impl ParametricTail {
    pub fn new(kind: TailKind, scale: f64, direction: Vec<f64>) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(AffineError::InvalidInput(format!(
                "tail scale must be positive and finite, got {scale}"
            )));
        }
        if let TailKind::PowerTail { index } = kind {
            if !(index.is_finite() && index > 0.0) {
                return Err(AffineError::InvalidInput(format!(
                    "power tail index must be positive, got {index}"
                )));
            }
        }
        let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(AffineError::InvalidInput(
                "tail direction must be a nonzero finite vector".into(),
            ));
        }
        let direction = direction.into_iter().map(|x| x / norm).collect();
        Ok(ParametricTail {
            kind,
            scale,
            direction,
            max_radius: f64::INFINITY,
        })
    }

    pub fn kind(&self) -> TailKind {
        self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Unit vector of the ray carrying the tail.
    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    /// Radius beyond which the (possibly truncated) tail carries no mass.
    pub fn max_radius(&self) -> f64 {
        self.max_radius
    }

    /// Left end of the radial support.
    pub fn min_radius(&self) -> f64 {
        match self.kind {
            TailKind::PowerTail { .. } => 1.0,
            TailKind::LogDivergentTail => E,
        }
    }

    fn truncated(&self, k: f64) -> Option<ParametricTail> {
        if k <= self.min_radius() {
            return None;
        }
        let mut t = self.clone();
        t.max_radius = t.max_radius.min(k);
        Some(t)
    }

    /// Closed-form value of `int_{lo < r <= hi} q(r) rho(dr)`.
    pub fn shell(&self, query: RadialQuery, lo: f64, hi: f64) -> ExtReal {
        let lo = lo.max(self.min_radius());
        let hi = hi.min(self.max_radius);
        if hi <= lo {
            return ExtReal::Finite(0.0);
        }
        let s = self.scale;
        match self.kind {
            TailKind::PowerTail { index: a } => power_shell(query, s, a, lo, hi),
            TailKind::LogDivergentTail => log_divergent_shell(query, s, lo, hi),
        }
    }

    /// Radial density at a complex radius (analytic continuation of the real density).
    fn density(&self, r: Complex64) -> Complex64 {
        match self.kind {
            TailKind::PowerTail { index } => self.scale * index * r.powf(-index - 1.0),
            TailKind::LogDivergentTail => {
                let l = r.ln();
                self.scale / (r * l * l)
            }
        }
    }

    /// `int_{r > r0} e^{z r} rho(dr)` along a ray rotated into the decay direction of `e^{z r}`.
    fn laplace_beyond(&self, z: Complex64, r0: f64) -> Complex64 {
        if r0.is_infinite() {
            return Complex64::new(0.0, 0.0);
        }
        let dir = if z.re <= 0.0 {
            -z.conj() / z.norm()
        } else if z.im != 0.0 {
            Complex64::new(0.0, z.im.signum())
        } else {
            return Complex64::new(f64::NAN, f64::NAN);
        };
        let integrand = |s: f64| {
            if s >= 1.0 {
                return Complex64::new(0.0, 0.0);
            }
            let t = r0 * s / (1.0 - s);
            let jac = r0 / ((1.0 - s) * (1.0 - s));
            let r = r0 + dir * t;
            let ez = (z * r).exp();
            if ez.norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            ez * self.density(r) * dir * jac
        };
        let tol = 1e-14 * self.scale;
        quad::integrate(integrand, 0.0, 1.0, tol).value
    }

    /// `int e^{z r} rho(dr)` over the whole (possibly truncated) support.
    pub fn laplace(&self, z: Complex64) -> Complex64 {
        if z.norm() == 0.0 {
            return Complex64::new(self.shell(RadialQuery::Mass, 0.0, f64::INFINITY).value(), 0.0);
        }
        let lo = self.min_radius();
        self.laplace_beyond(z, lo) - self.laplace_beyond(z, self.max_radius)
    }
}

fn power_shell(query: RadialQuery, s: f64, a: f64, lo: f64, hi: f64) -> ExtReal {
    // Integrals of q(r) * s * a * r^(-a-1) over (lo, hi].
    let pow_moment = |p: f64| -> ExtReal {
        // int r^p * s a r^{-a-1} dr = s a int r^{p-a-1} dr
        let e = p - a;
        if hi.is_infinite() {
            if e >= 0.0 {
                ExtReal::Infinite
            } else {
                ExtReal::Finite(s * a * lo.powf(e) / -e)
            }
        } else if e == 0.0 {
            ExtReal::Finite(s * a * (hi.ln() - lo.ln()))
        } else {
            ExtReal::Finite(s * a * (hi.powf(e) - lo.powf(e)) / e)
        }
    };
    match query {
        RadialQuery::Mass => pow_moment(0.0),
        RadialQuery::FirstMoment => pow_moment(1.0),
        RadialQuery::SecondMoment => pow_moment(2.0),
        RadialQuery::LogMoment => {
            // antiderivative G(r) = -s r^{-a} (log r + 1/a)
            let g = |r: f64| {
                if r.is_infinite() {
                    0.0
                } else {
                    -s * r.powf(-a) * (r.ln() + 1.0 / a)
                }
            };
            ExtReal::Finite(g(hi) - g(lo))
        }
    }
}

fn log_divergent_shell(query: RadialQuery, s: f64, lo: f64, hi: f64) -> ExtReal {
    // Density s / (r log^2 r); with y = log r the integrals reduce to exponential integrals.
    let (ylo, yhi) = (lo.ln(), hi.ln());
    match query {
        RadialQuery::Mass => {
            let upper = if hi.is_infinite() { 0.0 } else { 1.0 / yhi };
            ExtReal::Finite(s * (1.0 / ylo - upper))
        }
        _ if hi.is_infinite() => ExtReal::Infinite,
        RadialQuery::FirstMoment => {
            // int e^y / y^2 dy = Ei(y) - e^y / y
            let g = |y: f64| exp_integral_ei(y) - y.exp() / y;
            ExtReal::Finite(s * (g(yhi) - g(ylo)))
        }
        RadialQuery::SecondMoment => {
            // int e^{2y} / y^2 dy = 2 Ei(2y) - e^{2y} / y
            let g = |y: f64| 2.0 * exp_integral_ei(2.0 * y) - (2.0 * y).exp() / y;
            ExtReal::Finite(s * (g(yhi) - g(ylo)))
        }
        RadialQuery::LogMoment => ExtReal::Finite(s * (yhi.ln() - ylo.ln())),
    }
}

/// Exponential integral `Ei(x)` for `x > 0`.
pub(crate) fn exp_integral_ei(x: f64) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    debug_assert!(x > 0.0);
    if x <= 50.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..400 {
            term *= x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add < 1e-17 * sum {
                break;
            }
        }
        EULER_GAMMA + x.ln() + sum
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..40 {
            term *= k as f64 / x;
            sum += term;
            if term < 1e-17 {
                break;
            }
        }
        x.exp() / x * sum
    }
}

/// A Lévy measure on `D \ {0}` built from atoms and parametric tails.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyMeasure {
    dim: usize,
    atoms: Vec<Atom>,
    tails: Vec<ParametricTail>,
}

impl LevyMeasure {
    /// The zero measure.
    pub fn zero(dims: Dimensions) -> Self {
        LevyMeasure {
            dim: dims.d(),
            atoms: Vec::new(),
            tails: Vec::new(),
        }
    }

    /// Builds a measure, rejecting atoms or tail rays outside `D \ {0}`.
    pub fn new(dims: Dimensions, atoms: Vec<Atom>, tails: Vec<ParametricTail>) -> Result<Self> {
        let d = dims.d();
        for (j, atom) in atoms.iter().enumerate() {
            if atom.location.len() != d {
                return Err(AffineError::Dimension(format!(
                    "atom {j} has {} coordinates, expected {d}",
                    atom.location.len()
                )));
            }
            if atom.location.iter().any(|x| !x.is_finite()) {
                return Err(AffineError::InvalidInput(format!("atom {j} is not finite")));
            }
            if atom.radius() == 0.0 {
                return Err(AffineError::InvalidInput(format!("atom {j} sits at the origin")));
            }
            if let Some(i) = (0..dims.m).find(|&i| atom.location[i] < 0.0) {
                return Err(AffineError::InvalidInput(format!(
                    "atom {j} has negative coordinate {} (index {} belongs to I)",
                    atom.location[i],
                    i + 1
                )));
            }
            if !(atom.weight.is_finite() && atom.weight > 0.0) {
                return Err(AffineError::InvalidInput(format!(
                    "atom {j} weight must be positive, got {}",
                    atom.weight
                )));
            }
        }
        for (j, tail) in tails.iter().enumerate() {
            if tail.direction.len() != d {
                return Err(AffineError::Dimension(format!(
                    "tail {j} direction has {} coordinates, expected {d}",
                    tail.direction.len()
                )));
            }
            if (0..dims.m).any(|i| tail.direction[i] < 0.0) {
                return Err(AffineError::InvalidInput(format!(
                    "tail {j} direction leaves D (negative I-coordinate)"
                )));
            }
        }
        Ok(LevyMeasure { dim: d, atoms, tails })
    }

    /// Convenience constructor for purely atomic measures given as `(location, weight)` pairs.
    pub fn atomic(dims: Dimensions, atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let atoms = atoms.into_iter().map(|(x, w)| Atom::new(x, w)).collect();
        LevyMeasure::new(dims, atoms, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn tails(&self) -> &[ParametricTail] {
        &self.tails
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.tails.is_empty()
    }

    pub fn is_atomic(&self) -> bool {
        self.tails.is_empty()
    }

    /// `int_{lo < |xi| <= hi} q(|xi|) dnu`.
    pub fn shell(&self, query: RadialQuery, lo: f64, hi: f64) -> ExtReal {
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|a| a.radius() > lo && a.radius() <= hi)
            .map(|a| a.weight * query.eval(a.radius()))
            .sum();
        ExtReal::Finite(atoms) + self.tails.iter().map(|t| t.shell(query, lo, hi)).sum()
    }

    pub fn beyond(&self, query: RadialQuery, r: f64) -> ExtReal {
        self.shell(query, r, f64::INFINITY)
    }

    pub fn total_mass(&self) -> ExtReal {
        self.beyond(RadialQuery::Mass, 0.0)
    }

    pub fn mass_beyond(&self, r: f64) -> ExtReal {
        self.beyond(RadialQuery::Mass, r)
    }

    pub fn first_moment_beyond(&self, r: f64) -> ExtReal {
        self.beyond(RadialQuery::FirstMoment, r)
    }

    pub fn second_moment_beyond(&self, r: f64) -> ExtReal {
        self.beyond(RadialQuery::SecondMoment, r)
    }

    /// `int_{|xi| > 1} log |xi| dnu`, reported as `Infinite` when a tail family diverges.
    pub fn log_moment(&self) -> ExtReal {
        self.beyond(RadialQuery::LogMoment, 1.0)
    }

    /// `int xi_k dnu` over the whole space.
    pub fn component_moment(&self, k: usize) -> ExtReal {
        let atoms: f64 = self.atoms.iter().map(|a| a.weight * a.location[k]).sum();
        let tails = self
            .tails
            .iter()
            .map(|t| {
                t.shell(RadialQuery::FirstMoment, 0.0, f64::INFINITY)
                    .scale(t.direction[k])
            })
            .sum();
        ExtReal::Finite(atoms) + tails
    }

    /// Restriction of the measure to `{|xi| <= k}`.
    pub fn truncated(&self, k: f64) -> LevyMeasure {
        LevyMeasure {
            dim: self.dim,
            atoms: self.atoms.iter().filter(|a| a.radius() <= k).cloned().collect(),
            tails: self.tails.iter().filter_map(|t| t.truncated(k)).collect(),
        }
    }
}

/// Drops the part of every `mu_i` beyond radius `k` and returns the discarded
/// mass-plus-first-moment `sum_i int_{|xi|>k} (2 + |xi|) mu_i(dxi)`.
pub fn truncate_levy(mu: &[LevyMeasure], k: f64) -> Result<(Vec<LevyMeasure>, f64)> {
    if !(k > 1.0) {
        return Err(AffineError::Domain(format!("truncation level must exceed 1, got {k}")));
    }
    let truncated = mu.iter().map(|m| m.truncated(k)).collect();
    let eps: ExtReal = mu
        .iter()
        .map(|m| m.mass_beyond(k).scale(2.0) + m.first_moment_beyond(k))
        .sum();
    match eps {
        ExtReal::Finite(e) => Ok((truncated, e)),
        ExtReal::Infinite => Err(AffineError::InvalidInput(
            "first moment beyond the truncation level is infinite".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(m: usize, n: usize) -> Dimensions {
        Dimensions::new(m, n).unwrap()
    }

    #[test]
    fn log_moment_of_single_atom() {
        let nu = LevyMeasure::atomic(dims(0, 1), vec![(vec![E], 2.0)]).unwrap();
        assert!((nu.log_moment().value() - 2.0).abs() < 1e-15);
        let inner = LevyMeasure::atomic(dims(0, 1), vec![(vec![0.5], 7.0)]).unwrap();
        assert_eq!(inner.log_moment(), ExtReal::Finite(0.0));
    }

    #[test]
    fn log_divergent_tail_flags_infinite_log_moment() {
        let tail = ParametricTail::new(TailKind::LogDivergentTail, 1.5, vec![1.0]).unwrap();
        let nu = LevyMeasure::new(dims(0, 1), vec![], vec![tail]).unwrap();
        assert_eq!(nu.log_moment(), ExtReal::Infinite);
        // mass is finite and equals scale / log(e) = scale
        assert!((nu.total_mass().value() - 1.5).abs() < 1e-15);
        // beyond r = e^2 the mass is scale / 2
        assert!((nu.mass_beyond(E * E).value() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn log_divergent_truncated_log_moment_matches_loglog() {
        let tail = ParametricTail::new(TailKind::LogDivergentTail, 1.0, vec![1.0]).unwrap();
        let nu = LevyMeasure::new(dims(0, 1), vec![], vec![tail]).unwrap().truncated(1e6);
        let got = nu.log_moment().value();
        assert!((got - (1e6f64).ln().ln()).abs() < 1e-12);
    }

    #[test]
    fn log_divergent_moments_match_quadrature() {
        let tail = ParametricTail::new(TailKind::LogDivergentTail, 2.0, vec![1.0]).unwrap();
        for (q, p) in [(RadialQuery::FirstMoment, 1), (RadialQuery::SecondMoment, 2)] {
            let exact = tail.shell(q, 3.0, 40.0).value();
            let num = quad::integrate(
                |r| Complex64::new(2.0 * r.powi(p) / (r * r.ln().powi(2)), 0.0),
                3.0,
                40.0,
                1e-12,
            )
            .value
            .re;
            assert!((exact - num).abs() < 1e-9 * num, "{q:?}: {exact} vs {num}");
        }
    }

    #[test]
    fn power_tail_closed_forms_match_quadrature() {
        let tail = ParametricTail::new(TailKind::PowerTail { index: 2.5 }, 0.3, vec![1.0]).unwrap();
        let dens = |r: f64| 0.3 * 2.5 * r.powf(-3.5);
        for (q, f) in [
            (RadialQuery::Mass, Box::new(|_r: f64| 1.0) as Box<dyn Fn(f64) -> f64>),
            (RadialQuery::FirstMoment, Box::new(|r: f64| r)),
            (RadialQuery::SecondMoment, Box::new(|r: f64| r * r)),
            (RadialQuery::LogMoment, Box::new(|r: f64| r.ln())),
        ] {
            let exact = tail.shell(q, 2.0, 9.0).value();
            let num = quad::integrate(|r| Complex64::new(f(r) * dens(r), 0.0), 2.0, 9.0, 1e-13)
                .value
                .re;
            assert!((exact - num).abs() < 1e-11, "{q:?}: {exact} vs {num}");
        }
        // s a / (a - 2) for index a > 2
        let m2 = tail.shell(RadialQuery::SecondMoment, 1.0, f64::INFINITY).value();
        assert!((m2 - 1.5).abs() < 1e-14);
        let heavy = ParametricTail::new(TailKind::PowerTail { index: 1.5 }, 0.3, vec![1.0]).unwrap();
        assert_eq!(
            heavy.shell(RadialQuery::SecondMoment, 1.0, f64::INFINITY),
            ExtReal::Infinite
        );
        assert!(heavy.shell(RadialQuery::FirstMoment, 1.0, f64::INFINITY).is_finite());
    }

    #[test]
    fn ei_series_and_asymptotic_agree_near_switch() {
        // Ei(50) ~ 1.0844e20; relative continuity across the switch point.
        let lo = exp_integral_ei(50.0);
        let hi = exp_integral_ei(50.0 + 1e-9);
        assert!(((hi - lo) / lo).abs() < 1e-8);
        assert!((exp_integral_ei(1.0) - 1.895_117_816_355_936_8).abs() < 1e-14);
    }

    #[test]
    fn tail_laplace_matches_direct_quadrature() {
        let tail = ParametricTail::new(TailKind::PowerTail { index: 1.5 }, 0.7, vec![1.0]).unwrap();
        // real negative z: direct integral on the real line
        let z = Complex64::new(-0.8, 0.0);
        let direct = quad::integrate(
            |s: f64| {
                let r = 1.0 / (1.0 - s);
                Complex64::new(
                    (z.re * r).exp() * 0.7 * 1.5 * r.powf(-2.5) / ((1.0 - s) * (1.0 - s)),
                    0.0,
                )
            },
            0.0,
            1.0,
            1e-14,
        )
        .value;
        assert!((tail.laplace(z) - direct).norm() < 1e-12);
        // truncated support, oscillatory z: finite interval quadrature
        let t = tail.truncated(6.0).unwrap();
        let z = Complex64::new(-0.1, 2.3);
        let direct = quad::integrate(|r| (z * r).exp() * 0.7 * 1.5 * r.powf(-2.5), 1.0, 6.0, 1e-14).value;
        assert!((t.laplace(z) - direct).norm() < 1e-12);
        assert!((tail.laplace(Complex64::new(0.0, 0.0)).re - 0.7).abs() < 1e-15);
    }

    #[test]
    fn truncation_examples() {
        let d = dims(0, 1);
        let mu = LevyMeasure::atomic(d, vec![(vec![5.0], 0.3)]).unwrap();
        let (k4, e4) = truncate_levy(std::slice::from_ref(&mu), 4.0).unwrap();
        assert!(k4[0].is_zero());
        assert!((e4 - 2.1).abs() < 1e-15);
        let (k6, e6) = truncate_levy(std::slice::from_ref(&mu), 6.0).unwrap();
        assert_eq!(k6[0].atoms().len(), 1);
        assert_eq!(e6, 0.0);

        let mu = LevyMeasure::atomic(d, vec![(vec![0.5], 1.0), (vec![3.0], 2.0)]).unwrap();
        let (k2, e2) = truncate_levy(&[mu], 2.0).unwrap();
        assert_eq!(k2[0].atoms().len(), 1);
        assert_eq!(k2[0].atoms()[0].radius(), 0.5);
        assert!((e2 - 10.0).abs() < 1e-15);
    }

    #[test]
    fn truncation_rejects_small_level() {
        let mu = LevyMeasure::zero(dims(1, 0));
        assert!(matches!(truncate_levy(&[mu], 1.0), Err(AffineError::Domain(_))));
    }

    #[test]
    fn rejects_atoms_outside_state_space() {
        let d = dims(1, 1);
        assert!(LevyMeasure::atomic(d, vec![(vec![-0.1, 1.0], 1.0)]).is_err());
        assert!(LevyMeasure::atomic(d, vec![(vec![0.0, 0.0], 1.0)]).is_err());
        assert!(LevyMeasure::atomic(d, vec![(vec![0.0, 1.0], 0.0)]).is_err());
        assert!(LevyMeasure::atomic(d, vec![(vec![0.0, -1.0], 1.0)]).is_ok());
    }
}
