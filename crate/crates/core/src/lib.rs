//! Affine processes on `R_{>=0}^m x R^n`: admissibility, generalized Riccati
//! equations, stationary laws and Monte Carlo cross-checks.

// NaN must fail the range checks written as `!(x > a)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod functionals;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod quad;
pub mod riccati;
pub mod stationary;

pub use error::{AffineError, Result};
pub use model::{
    AdmissibleParameters, ComplexArgument, Dimensions, ExtReal, LevyMeasure, ParametricTail, TailKind, ValidationReport,
};
