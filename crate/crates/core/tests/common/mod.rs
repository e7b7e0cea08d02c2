#![allow(dead_code)]

use affine_core::model::validate_admissible;
use affine_core::{AdmissibleParameters, ComplexArgument, Dimensions, LevyMeasure};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

pub fn cir() -> AdmissibleParameters {
    let mut p = AdmissibleParameters::zero(Dimensions::new(1, 0).unwrap());
    p.alpha[0][(0, 0)] = 1.0;
    p.beta[(0, 0)] = -1.0;
    p.b[0] = 1.0;
    p
}

/// CIR plus one state-independent and one state-dependent jump atom.
pub fn cir_with_jump_atom() -> AdmissibleParameters {
    let mut p = cir();
    p.nu = LevyMeasure::atomic(p.dims, vec![(vec![0.3], 0.5)]).unwrap();
    p.mu[0] = LevyMeasure::atomic(p.dims, vec![(vec![0.5], 1.0)]).unwrap();
    p
}

/// State-dependent jump atoms at radii 1.5 and 3.
pub fn cir_two_atoms() -> AdmissibleParameters {
    let mut p = cir();
    p.mu[0] = LevyMeasure::atomic(p.dims, vec![(vec![1.5], 0.5), (vec![3.0], 0.2)]).unwrap();
    p
}

pub fn ou2() -> AdmissibleParameters {
    let mut p = AdmissibleParameters::zero(Dimensions::new(0, 2).unwrap());
    p.a = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.3]);
    p.beta = DMatrix::from_row_slice(2, 2, &[-1.0, 0.5, -0.5, -2.0]);
    p.b = DVector::from_vec(vec![0.2, -0.1]);
    p
}

pub fn mixed() -> AdmissibleParameters {
    let d = Dimensions::new(1, 1).unwrap();
    let mut p = AdmissibleParameters::zero(d);
    p.a[(1, 1)] = 0.2;
    p.alpha[0] = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.5]);
    p.b = DVector::from_vec(vec![0.7, 0.1]);
    p.beta = DMatrix::from_row_slice(2, 2, &[-0.8, 0.0, 0.5, -1.2]);
    p.nu = LevyMeasure::atomic(d, vec![(vec![0.3, -0.4], 1.0), (vec![2.0, 1.0], 0.2)]).unwrap();
    p.mu[0] = LevyMeasure::atomic(d, vec![(vec![0.5, 0.3], 1.0)]).unwrap();
    p
}

pub fn gaussian_ou() -> AdmissibleParameters {
    let mut p = AdmissibleParameters::zero(Dimensions::new(0, 1).unwrap());
    p.a[(0, 0)] = 0.5;
    p.beta[(0, 0)] = -1.0;
    p
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn arg(p: &AdmissibleParameters, values: Vec<Complex64>) -> ComplexArgument {
    ComplexArgument::new(p.dims, values).unwrap()
}

/// Random point of `U` with moderate modulus.
pub fn random_u<R: Rng>(rng: &mut R, dims: Dimensions) -> ComplexArgument {
    let values = (0..dims.d())
        .map(|k| {
            if dims.in_i(k) {
                c(-rng.gen_range(0.0..2.0), rng.gen_range(-3.0..3.0))
            } else {
                c(0.0, rng.gen_range(-3.0..3.0))
            }
        })
        .collect();
    ComplexArgument::new(dims, values).unwrap()
}

fn random_psd<R: Rng>(rng: &mut R, k: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(k, k, |_, _| rng.gen_range(-1.0..1.0));
    &g * g.transpose()
}

/// Random admissible parameter set with atomic jump measures.
pub fn random_admissible<R: Rng>(rng: &mut R) -> AdmissibleParameters {
    loop {
        let m = rng.gen_range(0..=2);
        let n = rng.gen_range(0..=2);
        if m + n == 0 {
            continue;
        }
        let dims = Dimensions::new(m, n).unwrap();
        let d = dims.d();
        let mut p = AdmissibleParameters::zero(dims);
        let aj = random_psd(rng, n);
        p.a.view_mut((m, m), (n, n)).copy_from(&aj);
        for i in 0..m {
            let idx: Vec<usize> = std::iter::once(i).chain(m..d).collect();
            let g = random_psd(rng, idx.len());
            for (r, &kr) in idx.iter().enumerate() {
                for (s, &ks) in idx.iter().enumerate() {
                    p.alpha[i][(kr, ks)] = g[(r, s)];
                }
            }
        }
        for k in 0..d {
            p.b[k] = if k < m {
                rng.gen_range(0.0..1.0)
            } else {
                rng.gen_range(-1.0..1.0)
            };
        }
        let atom = |rng: &mut R| -> Vec<f64> {
            (0..d)
                .map(|k| {
                    if k < m {
                        rng.gen_range(0.0..1.5)
                    } else {
                        rng.gen_range(-1.5..1.5)
                    }
                })
                .collect()
        };
        let nu_atoms = (0..rng.gen_range(0..3))
            .map(|_| (atom(rng), rng.gen_range(0.1..1.0)))
            .collect();
        p.nu = LevyMeasure::atomic(dims, nu_atoms).unwrap();
        for i in 0..m {
            let atoms: Vec<(Vec<f64>, f64)> = (0..rng.gen_range(0..3))
                .map(|_| (atom(rng), rng.gen_range(0.1..1.0)))
                .collect();
            p.mu[i] = LevyMeasure::atomic(dims, atoms).unwrap();
        }
        for i in 0..m {
            for k in 0..d {
                p.beta[(k, i)] = if k == i {
                    -rng.gen_range(0.5..2.0)
                } else if k < m {
                    let moment: f64 = p.mu[i].atoms().iter().map(|a| a.weight * a.location[k]).sum();
                    moment + rng.gen_range(0.0..1.0)
                } else {
                    rng.gen_range(-1.0..1.0)
                };
            }
        }
        for j in m..d {
            for k in m..d {
                p.beta[(k, j)] = rng.gen_range(-1.0..1.0) - if k == j { 1.5 } else { 0.0 };
            }
        }
        if validate_admissible(&p).unwrap().admissible {
            return p;
        }
    }
}

pub const CIR_SPEC: &str = r#"{
  "dims": {"m": 1, "n": 0},
  "alpha": [[[1.0]]],
  "b": [1.0],
  "beta": [[-1.0]]
}"#;

pub const LOG_DIVERGENT_SPEC: &str = r#"{
  "dims": {"m": 0, "n": 1},
  "a": [[0.5]],
  "beta": [[-1.0]],
  "nu": {"tails": [{"kind": "log_divergent_tail", "scale": 1.0, "direction": [1.0]}]}
}"#;

pub const ZERO_DRIFT_SPEC: &str = r#"{
  "dims": {"m": 1, "n": 1},
  "alpha": [[[1.0, 0.0], [0.0, 0.0]]],
  "b": [0.5, 0.0]
}"#;
