use serde::Serialize;

use crate::error::{AffineError, Result};
use crate::linalg;
use crate::model::{AdmissibleParameters, ExtReal};

/// Reason tags used in [`ErgodicityReport::reasons`] and [`AffineError::NotErgodic`].
pub const REASON_SPECTRAL: &str = "spectral";
pub const REASON_LOG_MOMENT: &str = "log-moment";

/// Both ergodicity hypotheses, evaluated on one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicityReport {
    /// `max Re(lambda)` over the eigenvalues of `beta`.
    pub spectral_abscissa: f64,
    pub stable: bool,
    pub block_stable_ii: bool,
    pub block_stable_jj: bool,
    /// `int_{|xi| > 1} log |xi| nu(dxi)`.
    pub log_moment: ExtReal,
    pub verdict: bool,
    /// Failed hypotheses, tagged `"spectral"` or `"log-moment"`.
    pub reasons: Vec<String>,
    pub notes: Vec<String>,
}

/// `max Re(lambda)` over the eigenvalues of `beta`; `beta` is stable iff the result is negative.
pub fn spectral_abscissa(beta: &nalgebra::DMatrix<f64>) -> f64 {
    linalg::spectral_abscissa(beta)
}

fn block_stable(block: &nalgebra::DMatrix<f64>) -> bool {
    block.nrows() == 0 || linalg::spectral_abscissa(block) < 0.0
}

pub fn check_ergodicity(p: &AdmissibleParameters) -> ErgodicityReport {
    let abscissa = linalg::spectral_abscissa(&p.beta);
    let stable = abscissa < 0.0;
    let block_stable_ii = block_stable(&p.beta_ii());
    let block_stable_jj = block_stable(&p.beta_jj());
    let log_moment = p.nu.log_moment();
    let mut reasons = Vec::new();
    let mut notes = Vec::new();
    if !stable {
        reasons.push(REASON_SPECTRAL.to_string());
        notes.push(format!("beta is not stable: spectral abscissa {abscissa}"));
    }
    if !log_moment.is_finite() {
        reasons.push(REASON_LOG_MOMENT.to_string());
        notes.push("int_{|xi|>1} log|xi| nu(dxi) diverges".to_string());
    }
    if stable != (block_stable_ii && block_stable_jj) {
        // Only possible when beta_IJ != 0 or at eigenvalues on the imaginary axis up to round-off.
        notes.push(format!(
            "block test disagrees with the full spectrum (beta_II stable: {block_stable_ii}, beta_JJ stable: {block_stable_jj})"
        ));
    }
    ErgodicityReport {
        spectral_abscissa: abscissa,
        stable,
        block_stable_ii,
        block_stable_jj,
        log_moment,
        verdict: reasons.is_empty(),
        reasons,
        notes,
    }
}

impl ErgodicityReport {
    pub fn into_result(self) -> Result<Self> {
        if self.verdict {
            Ok(self)
        } else {
            Err(AffineError::NotErgodic { reasons: self.reasons })
        }
    }
}

/// [`check_ergodicity`] turned into an error when a hypothesis fails.
pub fn require_ergodic(p: &AdmissibleParameters) -> Result<ErgodicityReport> {
    check_ergodicity(p).into_result()
}
