//! CP precondition shared by the product, insertion and integral engines.

use crate::error::{Error, Result};
use crate::family::{cp_verdict, Budget, MatrixFamily, Status};
use crate::linalg::ToleranceConfig;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug)]
pub struct CpGate {
    pub budget: Budget,
    /// Run even when the family is certified not CP.
    pub allow_refuted: bool,
    pub enabled: bool,
}

impl Default for CpGate {
    fn default() -> Self {
        Self { budget: Budget::default(), allow_refuted: false, enabled: true }
    }
}

#[derive(Clone, Debug, Default)]
pub struct GateReport {
    /// `None` when the gate was disabled.
    pub status: Option<Status>,
    pub warnings: Vec<String>,
}

impl CpGate {
    pub fn disabled() -> Self {
        Self { enabled: false, ..Self::default() }
    }

    pub fn allowing_refuted() -> Self {
        Self { allow_refuted: true, ..Self::default() }
    }

    pub fn check<T: Scalar>(&self, fam: &MatrixFamily<T>, tol: &ToleranceConfig<T>) -> Result<GateReport> {
        if !self.enabled {
            return Ok(GateReport::default());
        }
        let report = cp_verdict(fam, &self.budget, tol)?;
        let mut warnings = Vec::new();
        match report.cp.status {
            Status::CertifiedNo if !self.allow_refuted => {
                return Err(Error::Refused { property: report.cp.rule });
            }
            Status::CertifiedNo => warnings.push(format!("family is not CP ({}); running on override", report.cp.rule)),
            Status::Unknown => warnings.push("CP status unknown; results are not guaranteed to converge".into()),
            Status::CertifiedYes => {}
        }
        Ok(GateReport { status: Some(report.cp.status), warnings })
    }
}
