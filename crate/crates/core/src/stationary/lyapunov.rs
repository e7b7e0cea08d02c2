use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{AffineError, Result};
use crate::linalg;
use crate::model::AdmissibleParameters;

/// Inner radius of the region where `V` has its exact form.
pub const EXACT_REGION: f64 = 3.0;
const CERTIFICATE_MARGIN: f64 = 1e-9;

/// Solves `beta^T M + M beta = -I` for a stable block.
pub fn lyapunov_gram(beta_block: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    linalg::lyapunov_gram(beta_block)
}

/// Gram matrices and the weight `epsilon` of `V(y,z) = (y'M1y + eps z'M2z)^(1/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovData {
    pub m1: DMatrix<f64>,
    pub m2: DMatrix<f64>,
    pub epsilon: f64,
    m: usize,
    n: usize,
}

fn sym_sqrt(a: &DMatrix<f64>, inverse: bool) -> DMatrix<f64> {
    let eig = a.clone().symmetric_eigen();
    let d = eig.eigenvalues.map(|l| {
        let s = l.max(0.0).sqrt();
        if inverse {
            1.0 / s
        } else {
            s
        }
    });
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
}

impl LyapunovData {
    /// Gram matrices of `beta_II` and `beta_JJ`; `epsilon` defaults to
    /// `min(1, 1/(4 c4^2))` with `c4 = |M2^(1/2) beta_JI M1^(-1/2)|_2`.
    pub fn new(p: &AdmissibleParameters, epsilon: Option<f64>) -> Result<Self> {
        let m1 = lyapunov_gram(&p.beta_ii())?;
        let m2 = lyapunov_gram(&p.beta_jj())?;
        let eps = match epsilon {
            Some(e) => e,
            None if p.dims.m == 0 || p.dims.n == 0 => 1.0,
            None => {
                let coupling = sym_sqrt(&m2, false) * p.beta_ji() * sym_sqrt(&m1, true);
                let c4 = coupling.singular_values().max();
                if c4 > 0.0 {
                    (1.0 / (4.0 * c4 * c4)).min(1.0)
                } else {
                    1.0
                }
            }
        };
        Self::from_blocks(m1, m2, eps)
    }

    pub fn from_blocks(m1: DMatrix<f64>, m2: DMatrix<f64>, epsilon: f64) -> Result<Self> {
        if !m1.is_square() || !m2.is_square() {
            return Err(AffineError::Dimension("Gram blocks must be square".into()));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(AffineError::InvalidInput(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        for (name, g) in [("M1", &m1), ("M2", &m2)] {
            if g.nrows() > 0 && g.clone().cholesky().is_none() {
                return Err(AffineError::InvalidInput(format!("{name} is not positive definite")));
            }
        }
        let (m, n) = (m1.nrows(), m2.nrows());
        Ok(LyapunovData { m1, m2, epsilon, m, n })
    }

    fn check_state(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.m + self.n {
            return Err(AffineError::Dimension(format!(
                "state has {} entries, V expects {}",
                x.len(),
                self.m + self.n
            )));
        }
        Ok(())
    }

    /// `(y'M1y + eps z'M2z, g)` with `g = (M1y, eps M2z)`.
    fn quad_and_grad(&self, x: &[f64]) -> (f64, DVector<f64>) {
        let y = DVector::from_column_slice(&x[..self.m]);
        let z = DVector::from_column_slice(&x[self.m..]);
        let gy = &self.m1 * &y;
        let gz = &self.m2 * &z * self.epsilon;
        let q = y.dot(&gy) + z.dot(&gz);
        let mut g = DVector::zeros(self.m + self.n);
        g.rows_mut(0, self.m).copy_from(&gy);
        g.rows_mut(self.m, self.n).copy_from(&gz);
        (q, g)
    }

    fn quad(&self, x: &[f64]) -> f64 {
        self.quad_and_grad(x).0
    }

    /// `blockdiag(M1, eps M2)`.
    fn weight(&self) -> DMatrix<f64> {
        let d = self.m + self.n;
        let mut w = DMatrix::zeros(d, d);
        w.view_mut((0, 0), (self.m, self.m)).copy_from(&self.m1);
        w.view_mut((self.m, self.m), (self.n, self.n))
            .copy_from(&(&self.m2 * self.epsilon));
        w
    }

    pub fn gradient(&self, x: &[f64]) -> Result<DVector<f64>> {
        let v = eval_v(x, self)?;
        Ok(self.quad_and_grad(x).1 / v)
    }

    /// `W / V - g g' / V^3`.
    pub fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let v = eval_v(x, self)?;
        let g = self.quad_and_grad(x).1;
        Ok(self.weight() / v - &g * g.transpose() / v.powi(3))
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `V(x)` on the exact-form region `|x| > 3`.
pub fn eval_v(x: &[f64], lyap: &LyapunovData) -> Result<f64> {
    lyap.check_state(x)?;
    let r = norm(x);
    if !(r > EXACT_REGION) {
        return Err(AffineError::OutOfRegion(format!("|x| = {r} <= {EXACT_REGION}")));
    }
    Ok(lyap.quad(x).sqrt())
}

/// `A_K V(x) / V(x)`, written without square roots where possible.
fn generator_ratio(p: &AdmissibleParameters, k: f64, x: &[f64], lyap: &LyapunovData) -> Result<f64> {
    let d = p.dims.d();
    lyap.check_state(x)?;
    if lyap.m != p.dims.m || lyap.n != p.dims.n {
        return Err(AffineError::Dimension("Lyapunov data does not match the model".into()));
    }
    if !p.dims.contains(x) {
        return Err(AffineError::Domain("state is not in D".into()));
    }
    let r = norm(x);
    if !(r > EXACT_REGION + k) {
        return Err(AffineError::OutOfRegion(format!(
            "|x| = {r} <= 3 + K = {}",
            EXACT_REGION + k
        )));
    }
    let (q, g) = lyap.quad_and_grad(x);
    let xv = DVector::from_column_slice(x);
    let mut ratio = (&p.beta * &xv).dot(&g) / q;

    // Hessian / V = W / q - g g' / q^2
    let h = lyap.weight() / q - &g * g.transpose() / (q * q);
    for (i, al) in p.alpha.iter().enumerate() {
        if x[i] != 0.0 {
            ratio += x[i] * al.component_mul(&h).sum();
        }
    }

    for (i, mu) in p.mu.iter().enumerate() {
        let mk = mu.truncated(k);
        if !mk.tails().is_empty() {
            return Err(AffineError::Unsupported(
                "generator of V needs atomic jump measures".into(),
            ));
        }
        if x[i] == 0.0 {
            continue;
        }
        let mut jump = 0.0;
        for atom in mk.atoms() {
            let shifted: Vec<f64> = x.iter().zip(&atom.location).map(|(a, b)| a + b).collect();
            let gxi: f64 = g.iter().zip(&atom.location).map(|(a, b)| a * b).sum();
            jump += atom.weight * ((lyap.quad(&shifted) / q).sqrt() - 1.0 - gxi / q);
        }
        ratio += x[i] * jump;
    }
    debug_assert_eq!(xv.len(), d);
    Ok(ratio)
}

/// `A_K V(x) = DV(x) + J_K V(x)`: linear drift, state-dependent diffusion and
/// the jumps of `mu` restricted to `|xi| <= K`.
pub fn generator_apply_v(p: &AdmissibleParameters, k: f64, x: &[f64], lyap: &LyapunovData) -> Result<f64> {
    let ratio = generator_ratio(p, k, x, lyap)?;
    Ok(ratio * eval_v(x, lyap)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftCertificate {
    pub c: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
    pub holds: bool,
}

/// `A_K V(x) <= -c V(x) + C` over the samples: `C` is the smallest
/// non-negative constant covering every sample and `c` the largest rate
/// compatible with it.
pub fn drift_certificate(
    p: &AdmissibleParameters,
    k: f64,
    samples: &[Vec<f64>],
    lyap: &LyapunovData,
) -> Result<DriftCertificate> {
    if samples.is_empty() {
        return Err(AffineError::InvalidInput("no sample states".into()));
    }
    let mut pts = Vec::with_capacity(samples.len());
    for x in samples {
        let ratio = generator_ratio(p, k, x, lyap)?;
        let v = eval_v(x, lyap)?;
        pts.push((ratio, v));
    }
    let big_c = pts.iter().map(|(r, v)| r * v).fold(0.0, f64::max);
    let c = pts.iter().map(|(r, v)| big_c / v - r).fold(f64::INFINITY, f64::min);
    Ok(DriftCertificate {
        c,
        big_c,
        holds: c > CERTIFICATE_MARGIN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Dimensions, LevyMeasure};

    fn scalar(m1: f64) -> LyapunovData {
        LyapunovData::from_blocks(DMatrix::from_element(1, 1, m1), DMatrix::zeros(0, 0), 1.0).unwrap()
    }

    fn scalar_ou() -> AdmissibleParameters {
        let mut p = AdmissibleParameters::zero(Dimensions::new(1, 0).unwrap());
        p.beta[(0, 0)] = -1.0;
        p
    }

    #[test]
    fn gram_examples() {
        let m = lyapunov_gram(&DMatrix::from_element(1, 1, -1.0)).unwrap();
        assert!((m[(0, 0)] - 0.5).abs() < 1e-15);
        let beta = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -2.0]));
        let m = lyapunov_gram(&beta).unwrap();
        assert!((m - DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.25]))).norm() < 1e-14);
        assert!(matches!(
            lyapunov_gram(&DMatrix::from_element(1, 1, 1.0)),
            Err(AffineError::Domain(_))
        ));
    }

    #[test]
    fn v_formula_and_homogeneity() {
        let lyap = LyapunovData::from_blocks(DMatrix::from_element(1, 1, 0.5), DMatrix::from_element(1, 1, 0.25), 0.1)
            .unwrap();
        let v = eval_v(&[3.0, 4.0], &lyap).unwrap();
        assert!((v - 4.9f64.sqrt()).abs() < 1e-15);
        assert!((eval_v(&[6.0, 8.0], &lyap).unwrap() - 2.0 * v).abs() < 1e-14);
        assert!(matches!(eval_v(&[1.0, 1.0], &lyap), Err(AffineError::OutOfRegion(_))));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let m1 = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.7]);
        let m2 = DMatrix::from_element(1, 1, 0.4);
        let lyap = LyapunovData::from_blocks(m1, m2, 0.3).unwrap();
        let x = [2.0, 3.0, -4.0];
        let g = lyap.gradient(&x).unwrap();
        let h = lyap.hessian(&x).unwrap();
        let e = 1e-5;
        for k in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += e;
            xm[k] -= e;
            let fd = (eval_v(&xp, &lyap).unwrap() - eval_v(&xm, &lyap).unwrap()) / (2.0 * e);
            assert!((fd - g[k]).abs() < 1e-8);
            let gp = lyap.gradient(&xp).unwrap();
            let gm = lyap.gradient(&xm).unwrap();
            for l in 0..3 {
                assert!(((gp[l] - gm[l]) / (2.0 * e) - h[(l, k)]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn scalar_generator_is_minus_v() {
        let p = scalar_ou();
        let lyap = scalar(0.5);
        for x in [4.0, 10.0, 1e3] {
            let v = eval_v(&[x], &lyap).unwrap();
            assert_eq!(generator_apply_v(&p, 0.5, &[x], &lyap).unwrap(), -v);
        }
        let mut q = p.clone();
        q.alpha[0][(0, 0)] = 2.0;
        q.mu[0] = LevyMeasure::atomic(q.dims, vec![(vec![1.0], 0.7)]).unwrap();
        let a = generator_apply_v(&q, 1.5, &[10.0], &lyap).unwrap();
        assert!((a + eval_v(&[10.0], &lyap).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn scalar_certificate_is_exact() {
        let p = scalar_ou();
        let lyap = LyapunovData::new(&p, None).unwrap();
        let samples: Vec<Vec<f64>> = (0..20).map(|k| vec![4.0 * 1.5f64.powi(k)]).collect();
        let cert = drift_certificate(&p, 0.5, &samples, &lyap).unwrap();
        assert_eq!((cert.c, cert.big_c, cert.holds), (1.0, 0.0, true));
    }

    #[test]
    fn unstable_drift_fails() {
        let mut p = scalar_ou();
        p.beta[(0, 0)] = 1.0;
        let lyap = scalar(0.5);
        let samples = vec![vec![4.0], vec![40.0], vec![400.0]];
        let cert = drift_certificate(&p, 0.5, &samples, &lyap).unwrap();
        assert!(!cert.holds);
    }

    #[test]
    fn mixed_model_epsilon_and_certificate() {
        let d = Dimensions::new(1, 1).unwrap();
        let mut p = AdmissibleParameters::zero(d);
        p.alpha[0][(0, 0)] = 1.0;
        p.alpha[0][(1, 1)] = 0.5;
        p.beta = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 3.0, -1.0]);
        p.mu[0] = LevyMeasure::atomic(d, vec![(vec![0.5, 0.5], 1.0)]).unwrap();
        let lyap = LyapunovData::new(&p, None).unwrap();
        // M1 = M2 = 1/2, c4 = 3
        assert!((lyap.epsilon - 1.0 / 36.0).abs() < 1e-12);
        let mut samples = Vec::new();
        for k in 0..12 {
            let s = 5.0 * 2f64.powi(k);
            samples.push(vec![s, 0.0]);
            samples.push(vec![s, s]);
            samples.push(vec![0.0, -s]);
            samples.push(vec![0.3 * s, -s]);
        }
        let cert = drift_certificate(&p, 1.0, &samples, &lyap).unwrap();
        assert!(cert.holds, "{cert:?}");
    }
}
