//! The functions `F` and `R^I` of the generalized Riccati equations and the
//! linearization of their real split at the origin.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{AffineError, Result};
use crate::linalg::spectral_abscissa;
use crate::model::{AdmissibleParameters, ComplexArgument, LevyMeasure};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `e^z - 1` without cancellation for small `|z|`.
pub fn exp_m1(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        let mut term = z;
        let mut sum = z;
        for k in 2..40 {
            term *= z / k as f64;
            sum += term;
            if term.norm() <= 1e-17 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        z.exp() - 1.0
    }
}

/// `e^z - 1 - z` without cancellation for small `|z|`.
pub fn exp_m1_mz(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        let mut term = z * z * 0.5;
        let mut sum = term;
        for k in 3..40 {
            term *= z / k as f64;
            sum += term;
            if term.norm() <= 1e-17 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        z.exp() - 1.0 - z
    }
}

fn dot(u: &[Complex64], x: &[f64]) -> Complex64 {
    u.iter().zip(x).fold(ZERO, |acc, (a, b)| acc + a * *b)
}

/// Bilinear form `<u, M u> = sum_kl u_k M_kl u_l` (no conjugation).
fn quadratic(u: &[Complex64], mat: &DMatrix<f64>) -> Complex64 {
    let d = u.len();
    let mut acc = ZERO;
    for k in 0..d {
        let mut row = ZERO;
        for l in 0..d {
            let c = mat[(k, l)];
            if c != 0.0 {
                row += u[l] * c;
            }
        }
        acc += u[k] * row;
    }
    acc
}

/// `int (e^{<u,xi>} - 1 - <u_J, xi_J> 1{|xi| <= 1}) nu(dxi)`.
fn nu_term(nu: &LevyMeasure, m: usize, u: &[Complex64]) -> Complex64 {
    let mut acc = ZERO;
    for atom in nu.atoms() {
        let z = dot(u, &atom.location);
        let term = if atom.radius() <= 1.0 {
            let zj = dot(&u[m..], &atom.location[m..]);
            // e^z - 1 - z_J = (e^z - 1 - z) + z_I
            exp_m1_mz(z) + (z - zj)
        } else {
            exp_m1(z)
        };
        acc += term * atom.weight;
    }
    for tail in nu.tails() {
        // Tails sit on |xi| > 1, so the compensator is absent.
        let z = dot(u, tail.direction());
        let mass = tail.shell(crate::model::RadialQuery::Mass, 0.0, f64::INFINITY).value();
        acc += tail.laplace(z) - mass;
    }
    acc
}

/// `int (e^{<u,xi>} - 1 - <u,xi>) mu_i(dxi)`.
fn mu_term(mu: &LevyMeasure, u: &[Complex64]) -> Complex64 {
    let mut acc = ZERO;
    for atom in mu.atoms() {
        acc += exp_m1_mz(dot(u, &atom.location)) * atom.weight;
    }
    for tail in mu.tails() {
        use crate::model::RadialQuery;
        let z = dot(u, tail.direction());
        let mass = tail.shell(RadialQuery::Mass, 0.0, f64::INFINITY).value();
        let m1 = tail.shell(RadialQuery::FirstMoment, 0.0, f64::INFINITY).value();
        acc += tail.laplace(z) - mass - z * m1;
    }
    acc
}

/// `F(u)` without the membership check; `u` must lie in `U` (up to round-off).
pub fn f_unchecked(p: &AdmissibleParameters, u: &[Complex64]) -> Complex64 {
    let lin = dot(u, p.b.as_slice());
    quadratic(u, &p.a) + lin + nu_term(&p.nu, p.dims.m, u)
}

/// `R^I(u)` into `out` using the jump measures `mu` (possibly truncated).
pub fn ri_unchecked(p: &AdmissibleParameters, mu: &[LevyMeasure], u: &[Complex64], out: &mut [Complex64]) {
    let d = p.dims.d();
    for (i, o) in out.iter_mut().enumerate().take(p.dims.m) {
        let mut lin = ZERO;
        for (k, uk) in u.iter().enumerate().take(d) {
            let c = p.beta[(k, i)];
            if c != 0.0 {
                lin += uk * c;
            }
        }
        *o = quadratic(u, &p.alpha[i]) + lin + mu_term(&mu[i], u);
    }
}

fn check_dim(p: &AdmissibleParameters, u: &ComplexArgument) -> Result<()> {
    if u.as_slice().len() != p.dims.d() {
        return Err(AffineError::Dimension(format!(
            "argument has {} entries, model has d = {}",
            u.as_slice().len(),
            p.dims.d()
        )));
    }
    Ok(())
}

/// `F(u) = <u,au> + <b,u> + int (e^{<u,xi>} - 1 - <u_J,xi_J> 1{|xi|<=1}) nu(dxi)`.
pub fn eval_f(p: &AdmissibleParameters, u: &ComplexArgument) -> Result<Complex64> {
    check_dim(p, u)?;
    Ok(f_unchecked(p, u.as_slice()))
}

/// `R^I(u)`; with `truncation = Some(k)` every `mu_i` is restricted to `{|xi| <= k}`.
pub fn eval_ri(p: &AdmissibleParameters, u: &ComplexArgument, truncation: Option<f64>) -> Result<Vec<Complex64>> {
    check_dim(p, u)?;
    let mut out = vec![ZERO; p.dims.m];
    match truncation {
        Some(k) => {
            let (mu, _) = crate::model::truncate_levy(&p.mu, k)?;
            ri_unchecked(p, &mu, u.as_slice(), &mut out);
        }
        None => ri_unchecked(p, &p.mu, u.as_slice(), &mut out),
    }
    Ok(out)
}

/// `DR~(0)` for the real split `(x, y, z) -> (Re R^I, Im R^I, beta_JJ^T z)` with
/// `u = (x + i y, i z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linearization {
    pub matrix: DMatrix<f64>,
    pub spectral_abscissa: f64,
}

pub fn linearization_at_zero(p: &AdmissibleParameters) -> Linearization {
    let (m, n) = (p.dims.m, p.dims.n);
    let size = 2 * m + n;
    let mut mat = DMatrix::zeros(size, size);
    let bii_t = p.beta_ii().transpose();
    let bjj_t = p.beta_jj().transpose();
    let bji_t = p.beta_ji().transpose();
    mat.view_mut((0, 0), (m, m)).copy_from(&bii_t);
    mat.view_mut((m, m), (m, m)).copy_from(&bii_t);
    mat.view_mut((m, 2 * m), (m, n)).copy_from(&bji_t);
    mat.view_mut((2 * m, 2 * m), (n, n)).copy_from(&bjj_t);
    let spectral_abscissa = spectral_abscissa(&mat);
    Linearization {
        matrix: mat,
        spectral_abscissa,
    }
}

/// The real split map `R~(x, y, z)`; `state` has length `2m + n`.
pub fn real_split(p: &AdmissibleParameters, state: &[f64]) -> Vec<f64> {
    let (m, n) = (p.dims.m, p.dims.n);
    let u: Vec<Complex64> = (0..m)
        .map(|i| Complex64::new(state[i], state[m + i]))
        .chain((0..n).map(|j| Complex64::new(0.0, state[2 * m + j])))
        .collect();
    let mut r = vec![ZERO; m];
    ri_unchecked(p, &p.mu, &u, &mut r);
    let bjj_t = p.beta_jj().transpose();
    let z = nalgebra::DVector::from_column_slice(&state[2 * m..]);
    let zt = bjj_t * z;
    r.iter()
        .map(|c| c.re)
        .chain(r.iter().map(|c| c.im))
        .chain(zt.iter().cloned())
        .collect()
}
