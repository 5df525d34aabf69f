//! Structured pass/fail reports with margins, JSON-lines output, and batch
//! summaries.

use serde::Serialize;

/// Default absolute tolerance for identity checks on unit-scale inputs.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Default slack allowed below zero margin for inequality checks.
pub const INEQUALITY_TOL: f64 = 1e-9;

/// Outcome of one inequality or identity check.
///
/// Margins and residuals are rescaled by max(|lhs|, |rhs|, 1) before being
/// compared against the tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub name: String,
    pub instance: String,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs - lhs for inequalities (lhs <= rhs); -|lhs - rhs| for identities.
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

fn scale(lhs: f64, rhs: f64) -> f64 {
    lhs.abs().max(rhs.abs()).max(1.0)
}

impl VerificationReport {
    /// Check lhs <= rhs with relative slack `tol`.
    pub fn inequality(name: &str, instance: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let margin = rhs - lhs;
        let pass = margin >= -tol * scale(lhs, rhs);
        VerificationReport {
            name: name.to_string(),
            instance: instance.to_string(),
            lhs,
            rhs,
            margin,
            tolerance: tol,
            pass,
            witness: None,
        }
    }

    /// Check lhs == rhs with relative tolerance `tol`.
    pub fn identity(name: &str, instance: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let residual = (lhs - rhs).abs();
        let pass = residual <= tol * scale(lhs, rhs);
        VerificationReport {
            name: name.to_string(),
            instance: instance.to_string(),
            lhs,
            rhs,
            margin: -residual,
            tolerance: tol,
            pass,
            witness: None,
        }
    }

    pub fn with_witness(mut self, witness: String) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).unwrap()
    }
}

/// Aggregate over a batch of reports with the same name.
#[derive(Debug, Clone, Serialize)]
pub struct BatchSummary {
    pub name: String,
    pub instances: usize,
    pub passes: usize,
    pub min_margin: f64,
}

impl BatchSummary {
    pub fn from_reports(name: &str, reports: &[VerificationReport]) -> Self {
        BatchSummary {
            name: name.to_string(),
            instances: reports.len(),
            passes: reports.iter().filter(|r| r.pass).count(),
            min_margin: reports.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.passes == self.instances
    }

    pub fn csv_header() -> &'static str {
        "name,instances,passes,min_margin"
    }

    pub fn to_csv_line(&self) -> String {
        format!("{},{},{},{}", self.name, self.instances, self.passes, self.min_margin)
    }
}
