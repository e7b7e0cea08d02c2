//! Parameter containers for affine processes on `D = R_{>=0}^m x R^n`.
//!
//! The state-independent jump measure is called `nu` throughout; the
//! state-dependent measures are `mu[0..m]`.

mod levy;
pub mod spec_file;
mod validate;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{AffineError, Result};

pub use levy::{truncate_levy, Atom, ExtReal, LevyMeasure, ParametricTail, RadialQuery, TailKind};
pub use validate::{validate_admissible, Condition, ConditionCheck, ValidationReport};

/// Numbers of nonnegative (`m`) and real (`n`) coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimensions {
    pub m: usize,
    pub n: usize,
}

impl Dimensions {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m + n == 0 {
            return Err(AffineError::Dimension("m + n must be positive".into()));
        }
        Ok(Dimensions { m, n })
    }

    pub fn d(&self) -> usize {
        self.m + self.n
    }

    /// Zero-based indices of the nonnegative block `I`.
    pub fn i_range(&self) -> std::ops::Range<usize> {
        0..self.m
    }

    /// Zero-based indices of the real block `J`.
    pub fn j_range(&self) -> std::ops::Range<usize> {
        self.m..self.m + self.n
    }

    pub fn in_i(&self, k: usize) -> bool {
        k < self.m
    }

    /// Whether `x` lies in `D`.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.d() && x.iter().all(|v| v.is_finite()) && x[..self.m].iter().all(|&v| v >= 0.0)
    }
}

/// Slack allowed on `Re u_I <= 0` and `Re u_J = 0` when an argument was produced numerically.
pub const DOMAIN_SLACK: f64 = 1e-9;

/// A point of `U = C_{<=0}^m x iR^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexArgument {
    values: Vec<Complex64>,
    m: usize,
}

impl ComplexArgument {
    /// Checks membership in `U` exactly.
    pub fn new(dims: Dimensions, values: Vec<Complex64>) -> Result<Self> {
        Self::check(dims, &values, 0.0)?;
        Ok(ComplexArgument { values, m: dims.m })
    }

    /// Accepts round-off excursions up to [`DOMAIN_SLACK`] and projects them back onto `U`.
    pub fn projected(dims: Dimensions, mut values: Vec<Complex64>) -> Result<Self> {
        Self::check(dims, &values, DOMAIN_SLACK)?;
        for (k, v) in values.iter_mut().enumerate() {
            if k < dims.m {
                v.re = v.re.min(0.0);
            } else {
                v.re = 0.0;
            }
        }
        Ok(ComplexArgument { values, m: dims.m })
    }

    /// The origin of `U`.
    pub fn zero(dims: Dimensions) -> Self {
        ComplexArgument {
            values: vec![Complex64::new(0.0, 0.0); dims.d()],
            m: dims.m,
        }
    }

    /// `u = i y` for a real vector `y`.
    pub fn imaginary(dims: Dimensions, y: &[f64]) -> Result<Self> {
        Self::new(dims, y.iter().map(|&v| Complex64::new(0.0, v)).collect())
    }

    fn check(dims: Dimensions, values: &[Complex64], slack: f64) -> Result<()> {
        if values.len() != dims.d() {
            return Err(AffineError::Dimension(format!(
                "argument has {} entries, expected {}",
                values.len(),
                dims.d()
            )));
        }
        for (k, v) in values.iter().enumerate() {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(AffineError::Domain(format!("u_{} is not finite", k + 1)));
            }
            if k < dims.m && v.re > slack {
                return Err(AffineError::Domain(format!(
                    "Re u_{} = {} > 0 lies outside C_<=0",
                    k + 1,
                    v.re
                )));
            }
            if k >= dims.m && v.re.abs() > slack {
                return Err(AffineError::Domain(format!(
                    "Re u_{} = {} != 0 lies outside iR",
                    k + 1,
                    v.re
                )));
            }
        }
        Ok(())
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.values
    }

    /// `v = u_I`.
    pub fn v(&self) -> &[Complex64] {
        &self.values[..self.m]
    }

    /// `w = u_J`.
    pub fn w(&self) -> &[Complex64] {
        &self.values[self.m..]
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.norm() == 0.0)
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.values
    }
}

/// The tuple `(a, alpha, b, beta, nu, mu)` of an affine process.
///
/// Construction only checks shapes; [`validate_admissible`] checks the
/// admissibility conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleParameters {
    pub dims: Dimensions,
    /// Constant diffusion matrix, `d x d`.
    pub a: DMatrix<f64>,
    /// State-dependent diffusion matrices, one `d x d` matrix per `i in I`.
    pub alpha: Vec<DMatrix<f64>>,
    /// Constant drift.
    pub b: DVector<f64>,
    /// Linear drift, `d x d`.
    pub beta: DMatrix<f64>,
    /// State-independent jump measure.
    pub nu: LevyMeasure,
    /// State-dependent jump measures, one per `i in I`.
    pub mu: Vec<LevyMeasure>,
}

impl AdmissibleParameters {
    pub fn new(
        dims: Dimensions,
        a: DMatrix<f64>,
        alpha: Vec<DMatrix<f64>>,
        b: DVector<f64>,
        beta: DMatrix<f64>,
        nu: LevyMeasure,
        mu: Vec<LevyMeasure>,
    ) -> Result<Self> {
        let p = AdmissibleParameters {
            dims,
            a,
            alpha,
            b,
            beta,
            nu,
            mu,
        };
        p.check_structure()?;
        Ok(p)
    }

    /// All-zero parameters: the process that stays at its starting point.
    pub fn zero(dims: Dimensions) -> Self {
        let d = dims.d();
        AdmissibleParameters {
            dims,
            a: DMatrix::zeros(d, d),
            alpha: vec![DMatrix::zeros(d, d); dims.m],
            b: DVector::zeros(d),
            beta: DMatrix::zeros(d, d),
            nu: LevyMeasure::zero(dims),
            mu: vec![LevyMeasure::zero(dims); dims.m],
        }
    }

    /// Shape and finiteness checks; distinct from admissibility.
    pub fn check_structure(&self) -> Result<()> {
        let d = self.dims.d();
        let square = |name: &str, mat: &DMatrix<f64>| -> Result<()> {
            if mat.nrows() != d || mat.ncols() != d {
                return Err(AffineError::Dimension(format!(
                    "{name} is {}x{}, expected {d}x{d}",
                    mat.nrows(),
                    mat.ncols()
                )));
            }
            if mat.iter().any(|v| !v.is_finite()) {
                return Err(AffineError::Dimension(format!("{name} has non-finite entries")));
            }
            Ok(())
        };
        square("a", &self.a)?;
        square("beta", &self.beta)?;
        if self.alpha.len() != self.dims.m {
            return Err(AffineError::Dimension(format!(
                "alpha has {} matrices, expected m = {}",
                self.alpha.len(),
                self.dims.m
            )));
        }
        for (i, al) in self.alpha.iter().enumerate() {
            square(&format!("alpha[{}]", i + 1), al)?;
        }
        if self.b.len() != d || self.b.iter().any(|v| !v.is_finite()) {
            return Err(AffineError::Dimension(format!(
                "b has length {}, expected {d}",
                self.b.len()
            )));
        }
        if self.mu.len() != self.dims.m {
            return Err(AffineError::Dimension(format!(
                "mu has {} measures, expected m = {}",
                self.mu.len(),
                self.dims.m
            )));
        }
        for (name, meas) in std::iter::once(("nu".to_string(), &self.nu))
            .chain(self.mu.iter().enumerate().map(|(i, m)| (format!("mu[{}]", i + 1), m)))
        {
            if meas.dim() != d {
                return Err(AffineError::Dimension(format!(
                    "{name} lives in dimension {}, expected {d}",
                    meas.dim()
                )));
            }
        }
        Ok(())
    }

    pub fn beta_ii(&self) -> DMatrix<f64> {
        let m = self.dims.m;
        self.beta.view((0, 0), (m, m)).into_owned()
    }

    pub fn beta_jj(&self) -> DMatrix<f64> {
        let (m, n) = (self.dims.m, self.dims.n);
        self.beta.view((m, m), (n, n)).into_owned()
    }

    /// Lower-left block `beta_JI` (`n x m`).
    pub fn beta_ji(&self) -> DMatrix<f64> {
        let (m, n) = (self.dims.m, self.dims.n);
        self.beta.view((m, 0), (n, m)).into_owned()
    }

    /// Same parameters with every `mu_i` restricted to `{|xi| <= k}`.
    pub fn with_truncated_mu(&self, k: f64) -> Result<AdmissibleParameters> {
        let (mu, _) = truncate_levy(&self.mu, k)?;
        Ok(AdmissibleParameters { mu, ..self.clone() })
    }

    /// Same `(alpha, beta, mu)` with `a = 0`, `b = 0`, `nu = 0`.
    pub fn without_state_independent_part(&self) -> AdmissibleParameters {
        let d = self.dims.d();
        AdmissibleParameters {
            a: DMatrix::zeros(d, d),
            b: DVector::zeros(d),
            nu: LevyMeasure::zero(self.dims),
            ..self.clone()
        }
    }

    /// Whether every jump measure is a finite list of atoms.
    pub fn is_atomic(&self) -> bool {
        self.nu.is_atomic() && self.mu.iter().all(|m| m.is_atomic())
    }
}
