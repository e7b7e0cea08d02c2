//! Admissibility conditions (i)-(vi) for `(a, alpha, b, beta, nu, mu)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{AdmissibleParameters, ExtReal, LevyMeasure, RadialQuery};
use crate::error::{AffineError, Result};
use crate::linalg::{asymmetry, min_sym_eigenvalue, psd_tolerance};

/// One of the six admissibility conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    I,
    Ii,
    Iii,
    Iv,
    V,
    Vi,
}

impl Condition {
    pub const ALL: [Condition; 6] = [
        Condition::I,
        Condition::Ii,
        Condition::Iii,
        Condition::Iv,
        Condition::V,
        Condition::Vi,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Condition::I => "(i)",
            Condition::Ii => "(ii)",
            Condition::Iii => "(iii)",
            Condition::Iv => "(iv)",
            Condition::V => "(v)",
            Condition::Vi => "(vi)",
        }
    }

    fn statement(self) -> &'static str {
        match self {
            Condition::I => "a symmetric PSD, a_kl = 0 for all k in I or l in I",
            Condition::Ii => "alpha_i symmetric PSD, alpha_i,kl = 0 if k or l in I \\ {i}",
            Condition::Iii => "int (1 ^ |xi|^2 + sum_{i in I} (1 ^ xi_i)) nu(dxi) < inf",
            Condition::Iv => "int (|xi| ^ |xi|^2 + sum_{k in I \\ {i}} xi_k) mu_i(dxi) < inf",
            Condition::V => "b in D",
            Condition::Vi => {
                "beta_ki - int xi_k mu_i(dxi) >= 0 for i in I, k in I \\ {i}; beta_ki = 0 for k in I, i in J"
            }
        }
    }
}

/// Outcome of one condition, with one message per offending entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: Condition,
    pub statement: String,
    pub passed: bool,
    pub violations: Vec<String>,
}

/// Per-condition admissibility results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub admissible: bool,
    pub conditions: Vec<ConditionCheck>,
}

impl ValidationReport {
    pub fn check(&self, c: Condition) -> &ConditionCheck {
        self.conditions
            .iter()
            .find(|x| x.condition == c)
            .expect("report holds every condition")
    }

    pub fn failed(&self) -> Vec<Condition> {
        self.conditions
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.condition)
            .collect()
    }

    /// Converts a failing report into [`AffineError::Inadmissible`].
    pub fn into_result(self) -> Result<()> {
        if self.admissible {
            return Ok(());
        }
        let msg = self
            .conditions
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{}: {}", c.condition.label(), c.violations.join("; ")))
            .collect::<Vec<_>>()
            .join(" | ");
        Err(AffineError::Inadmissible(msg))
    }
}

/// Checks conditions (i)-(vi). Structural problems are reported as
/// [`AffineError::Dimension`] rather than in the report.
pub fn validate_admissible(p: &AdmissibleParameters) -> Result<ValidationReport> {
    p.check_structure()?;
    let mut conditions = Vec::with_capacity(6);
    for c in Condition::ALL {
        let violations = match c {
            Condition::I => check_a(p),
            Condition::Ii => check_alpha(p),
            Condition::Iii => check_nu(p),
            Condition::Iv => check_mu(p),
            Condition::V => check_b(p),
            Condition::Vi => check_beta(p),
        };
        conditions.push(ConditionCheck {
            condition: c,
            statement: c.statement().to_string(),
            passed: violations.is_empty(),
            violations,
        });
    }
    Ok(ValidationReport {
        admissible: conditions.iter().all(|c| c.passed),
        conditions,
    })
}

fn check_psd(name: &str, mat: &DMatrix<f64>, out: &mut Vec<String>) {
    let tol = psd_tolerance(mat);
    let asym = asymmetry(mat);
    if asym > tol {
        out.push(format!("{name} is not symmetric (max |A - A^T| = {asym:e})"));
    }
    let lam = min_sym_eigenvalue(mat);
    if lam < -tol {
        out.push(format!("{name} is not positive semidefinite (eigenvalue {lam:e})"));
    }
}

fn check_a(p: &AdmissibleParameters) -> Vec<String> {
    let mut out = Vec::new();
    check_psd("a", &p.a, &mut out);
    let d = p.dims.d();
    for k in 0..d {
        for l in 0..d {
            if (p.dims.in_i(k) || p.dims.in_i(l)) && p.a[(k, l)] != 0.0 {
                out.push(format!("a_{}{} = {} must vanish", k + 1, l + 1, p.a[(k, l)]));
            }
        }
    }
    out
}

fn check_alpha(p: &AdmissibleParameters) -> Vec<String> {
    let mut out = Vec::new();
    let d = p.dims.d();
    for (i, al) in p.alpha.iter().enumerate() {
        check_psd(&format!("alpha_{}", i + 1), al, &mut out);
        let other = |k: usize| p.dims.in_i(k) && k != i;
        for k in 0..d {
            for l in 0..d {
                if (other(k) || other(l)) && al[(k, l)] != 0.0 {
                    out.push(format!(
                        "alpha_{},{}{} = {} must vanish",
                        i + 1,
                        k + 1,
                        l + 1,
                        al[(k, l)]
                    ));
                }
            }
        }
    }
    out
}

fn infinite(value: ExtReal) -> bool {
    !value.is_finite()
}

fn check_nu(p: &AdmissibleParameters) -> Vec<String> {
    // Atoms never contribute an infinite integral; tails live on r >= 1 and
    // only need a finite mass there.
    let mut out = Vec::new();
    if infinite(p.nu.mass_beyond(1.0)) {
        out.push("nu({|xi| > 1}) is infinite".into());
    }
    if infinite(p.nu.shell(RadialQuery::SecondMoment, 0.0, 1.0)) {
        out.push("int_{|xi| <= 1} |xi|^2 nu(dxi) is infinite".into());
    }
    out
}

fn check_mu(p: &AdmissibleParameters) -> Vec<String> {
    let mut out = Vec::new();
    for (i, mu) in p.mu.iter().enumerate() {
        if infinite(mu.first_moment_beyond(1.0)) {
            out.push(format!("int_{{|xi| > 1}} |xi| mu_{}(dxi) is infinite", i + 1));
        }
        if infinite(mu.shell(RadialQuery::SecondMoment, 0.0, 1.0)) {
            out.push(format!("int_{{|xi| <= 1}} |xi|^2 mu_{}(dxi) is infinite", i + 1));
        }
        for k in p.dims.i_range().filter(|&k| k != i) {
            if infinite(mu.component_moment(k)) {
                out.push(format!("int xi_{} mu_{}(dxi) is infinite", k + 1, i + 1));
            }
        }
    }
    out
}

fn check_b(p: &AdmissibleParameters) -> Vec<String> {
    p.dims
        .i_range()
        .filter(|&k| p.b[k] < 0.0)
        .map(|k| format!("b_{} = {} < 0", k + 1, p.b[k]))
        .collect()
}

fn jump_moment(mu: &LevyMeasure, k: usize) -> f64 {
    mu.component_moment(k).value()
}

fn check_beta(p: &AdmissibleParameters) -> Vec<String> {
    let mut out = Vec::new();
    for i in p.dims.i_range() {
        for k in p.dims.i_range().filter(|&k| k != i) {
            let slack = p.beta[(k, i)] - jump_moment(&p.mu[i], k);
            if !(slack >= 0.0) {
                out.push(format!(
                    "beta_{}{} - int xi_{} mu_{}(dxi) = {} < 0",
                    k + 1,
                    i + 1,
                    k + 1,
                    i + 1,
                    slack
                ));
            }
        }
    }
    for k in p.dims.i_range() {
        for i in p.dims.j_range() {
            if p.beta[(k, i)] != 0.0 {
                out.push(format!("beta_{}{} = {} must vanish", k + 1, i + 1, p.beta[(k, i)]));
            }
        }
    }
    out
}
