//! JSON model-spec files.
//!
//! ```json
//! {
//!   "dims": {"m": 1, "n": 0},
//!   "a": [[0]],
//!   "alpha": [[[1]]],
//!   "b": [1],
//!   "beta": [[-1]],
//!   "nu": {"atoms": [{"xi": [0.5], "w": 0.2}], "tails": []},
//!   "mu": [{"atoms": [], "tails": []}],
//!   "run": {"tol": 1e-8}
//! }
//! ```
//!
//! Matrices are lists of rows; a flat row-major list of `d*d` numbers is also
//! accepted. Omitted parameter fields default to zero.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{AdmissibleParameters, Atom, Dimensions, LevyMeasure, ParametricTail, TailKind};
use crate::error::{AffineError, Result};

/// Matrix written either as rows or as a flat row-major list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl MatrixSpec {
    fn from_matrix(mat: &DMatrix<f64>) -> Self {
        MatrixSpec::Rows((0..mat.nrows()).map(|r| mat.row(r).iter().cloned().collect()).collect())
    }

    fn to_matrix(&self, name: &str, d: usize) -> Result<DMatrix<f64>> {
        let bad = |what: String| AffineError::Dimension(format!("{name}: {what}"));
        match self {
            MatrixSpec::Rows(rows) => {
                // `[]` parses as Rows; accept it for d = 0 only.
                if rows.len() != d {
                    return Err(bad(format!("{} rows, expected {d}", rows.len())));
                }
                let mut m = DMatrix::zeros(d, d);
                for (r, row) in rows.iter().enumerate() {
                    if row.len() != d {
                        return Err(bad(format!("row {} has {} entries, expected {d}", r + 1, row.len())));
                    }
                    for (c, v) in row.iter().enumerate() {
                        m[(r, c)] = *v;
                    }
                }
                Ok(m)
            }
            MatrixSpec::Flat(vals) => {
                if vals.len() != d * d {
                    return Err(bad(format!("{} entries, expected {}", vals.len(), d * d)));
                }
                Ok(DMatrix::from_row_slice(d, d, vals))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub xi: Vec<f64>,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailSpec {
    #[serde(flatten)]
    pub kind: TailKind,
    pub scale: f64,
    pub direction: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
    #[serde(default)]
    pub tails: Vec<TailSpec>,
}

impl MeasureSpec {
    fn from_measure(m: &LevyMeasure) -> Self {
        MeasureSpec {
            atoms: m
                .atoms()
                .iter()
                .map(|a| AtomSpec {
                    xi: a.location.clone(),
                    w: a.weight,
                })
                .collect(),
            tails: m
                .tails()
                .iter()
                .map(|t| TailSpec {
                    kind: t.kind(),
                    scale: t.scale(),
                    direction: t.direction().to_vec(),
                })
                .collect(),
        }
    }

    fn to_measure(&self, dims: Dimensions) -> Result<LevyMeasure> {
        let atoms = self.atoms.iter().map(|a| Atom::new(a.xi.clone(), a.w)).collect();
        let tails = self
            .tails
            .iter()
            .map(|t| ParametricTail::new(t.kind, t.scale, t.direction.clone()))
            .collect::<Result<Vec<_>>>()?;
        LevyMeasure::new(dims, atoms, tails)
    }
}

/// One coordinate of a transform argument: `y` means `i y`, `[re, im]` is explicit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexEntry {
    Imag(f64),
    Pair([f64; 2]),
}

impl ComplexEntry {
    pub fn to_complex(self) -> num_complex::Complex64 {
        match self {
            ComplexEntry::Imag(y) => num_complex::Complex64::new(0.0, y),
            ComplexEntry::Pair([re, im]) => num_complex::Complex64::new(re, im),
        }
    }
}

/// Optional defaults for the command-line front end.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub tol: Option<f64>,
    pub t: Option<f64>,
    pub x: Option<Vec<f64>>,
    pub x0: Option<Vec<f64>>,
    pub horizon: Option<f64>,
    pub dt: Option<f64>,
    pub paths: Option<usize>,
    pub seed: Option<u64>,
    pub u_grid: Option<Vec<Vec<ComplexEntry>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub dims: Dimensions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<MatrixSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<MeasureSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSpec>,
}

impl ModelSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: ModelSpec = serde_json::from_str(text)
            .map_err(|e| AffineError::Parse(format!("{e} (line {}, column {})", e.line(), e.column())))?;
        Dimensions::new(spec.dims.m, spec.dims.n).map_err(|e| AffineError::Parse(e.to_string()))?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| AffineError::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn from_params(p: &AdmissibleParameters) -> Self {
        ModelSpec {
            dims: p.dims,
            a: Some(MatrixSpec::from_matrix(&p.a)),
            alpha: Some(p.alpha.iter().map(MatrixSpec::from_matrix).collect()),
            b: Some(p.b.iter().cloned().collect()),
            beta: Some(MatrixSpec::from_matrix(&p.beta)),
            nu: Some(MeasureSpec::from_measure(&p.nu)),
            mu: Some(p.mu.iter().map(MeasureSpec::from_measure).collect()),
            run: None,
        }
    }

    /// Builds the parameter set; admissibility is not checked here.
    pub fn to_params(&self) -> Result<AdmissibleParameters> {
        let dims = self.dims;
        let d = dims.d();
        let mut p = AdmissibleParameters::zero(dims);
        if let Some(a) = &self.a {
            p.a = a.to_matrix("a", d)?;
        }
        if let Some(alpha) = &self.alpha {
            p.alpha = alpha
                .iter()
                .enumerate()
                .map(|(i, m)| m.to_matrix(&format!("alpha[{}]", i + 1), d))
                .collect::<Result<_>>()?;
        }
        if let Some(b) = &self.b {
            p.b = DVector::from_column_slice(b);
        }
        if let Some(beta) = &self.beta {
            p.beta = beta.to_matrix("beta", d)?;
        }
        if let Some(nu) = &self.nu {
            p.nu = nu.to_measure(dims)?;
        }
        if let Some(mu) = &self.mu {
            p.mu = mu.iter().map(|m| m.to_measure(dims)).collect::<Result<_>>()?;
        }
        p.check_structure()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model spec serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CIR: &str = r#"{
        "dims": {"m": 1, "n": 0},
        "alpha": [[[1.0]]],
        "b": [1.0],
        "beta": [[-1.0]],
        "nu": {"atoms": [{"xi": [0.5], "w": 0.2}]},
        "mu": [{"atoms": [{"xi": [1.0], "w": 0.3}]}],
        "run": {"tol": 1e-8, "u_grid": [[[-1.0, 0.0]], [2.0]]}
    }"#;

    #[test]
    fn parses_cir_spec() {
        let spec = ModelSpec::parse(CIR).unwrap();
        let p = spec.to_params().unwrap();
        assert_eq!(p.alpha[0][(0, 0)], 1.0);
        assert_eq!(p.nu.atoms()[0].weight, 0.2);
        assert_eq!(p.mu[0].atoms()[0].location, vec![1.0]);
        let grid = spec.run.unwrap().u_grid.unwrap();
        assert_eq!(grid[0][0], ComplexEntry::Pair([-1.0, 0.0]));
        assert_eq!(grid[1][0], ComplexEntry::Imag(2.0));
    }

    #[test]
    fn round_trip_preserves_parameters() {
        let p = ModelSpec::parse(CIR).unwrap().to_params().unwrap();
        let text = ModelSpec::from_params(&p).to_json();
        let q = ModelSpec::parse(&text).unwrap().to_params().unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn tails_round_trip() {
        let text = r#"{"dims": {"m": 0, "n": 2},
            "beta": [-1, 0, 0, -1],
            "nu": {"tails": [{"kind": "log_divergent_tail", "scale": 0.5, "direction": [3, 4]},
                             {"kind": "power_tail", "index": 1.5, "scale": 0.1, "direction": [1, 0]}]}}"#;
        let p = ModelSpec::parse(text).unwrap().to_params().unwrap();
        assert_eq!(p.nu.tails().len(), 2);
        assert_eq!(p.nu.tails()[0].direction(), &[0.6, 0.8]);
        let q = ModelSpec::parse(&ModelSpec::from_params(&p).to_json())
            .unwrap()
            .to_params()
            .unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = ModelSpec::parse(&CIR[..40]).unwrap_err();
        match err {
            AffineError::Parse(msg) => assert!(msg.contains("line")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            ModelSpec::parse(r#"{"dims": {"m": 0, "n": 0}}"#),
            Err(AffineError::Parse(_))
        ));
        assert!(matches!(
            ModelSpec::parse(r#"{"dims": {"m": 1, "n": 0}, "b": [NaN]}"#),
            Err(AffineError::Parse(_))
        ));
    }

    #[test]
    fn shape_errors_are_dimension_errors() {
        let text = r#"{"dims": {"m": 1, "n": 1}, "beta": [[1, 2, 3]]}"#;
        assert!(matches!(
            ModelSpec::parse(text).unwrap().to_params(),
            Err(AffineError::Dimension(_))
        ));
    }
}
