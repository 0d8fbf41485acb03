//! Post-hoc checks on a recorded trace.

use serde::{Deserialize, Serialize};

use super::TraceRecord;
use crate::error::{QcqpError, Result};

/// Relative slack for the descent audit: a step counts as an increase when
/// `L⁽ᵏ⁺¹⁾ > L⁽ᵏ⁾ + TOL_MONO·(1 + |L⁽ᵏ⁾|)`.
pub const TOL_MONO: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotoneViolation {
    /// Iteration index of the earlier value.
    pub k: usize,
    pub before: f64,
    pub after: f64,
}

impl MonotoneViolation {
    pub fn increase(&self) -> f64 {
        self.after - self.before
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub violations: Vec<MonotoneViolation>,
    /// Largest `L⁽ᵏ⁺¹⁾ − L⁽ᵏ⁾` seen over all pairs, clamped at 0.
    pub max_increase: f64,
    pub pairs_checked: usize,
}

impl MonotonicityReport {
    pub fn is_monotone(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Audits a sequence of `(k, L⁽ᵏ⁾)` pairs in order.
pub fn audit_sequence(values: &[(usize, f64)], tol_mono: f64) -> Result<MonotonicityReport> {
    if values.len() < 2 {
        return Err(QcqpError::Parameter(format!(
            "monotonicity audit needs at least 2 values, got {}",
            values.len()
        )));
    }
    let mut violations = Vec::new();
    let mut max_increase = 0.0f64;
    for w in values.windows(2) {
        let (k, before) = w[0];
        let (_, after) = w[1];
        max_increase = max_increase.max(after - before);
        if after > before + tol_mono * (1.0 + before.abs()) || (after.is_nan() && !before.is_nan()) {
            violations.push(MonotoneViolation { k, before, after });
        }
    }
    Ok(MonotonicityReport {
        violations,
        max_increase,
        pairs_checked: values.len() - 1,
    })
}

pub fn audit_monotonicity(trace: &[TraceRecord], tol_mono: f64) -> Result<MonotonicityReport> {
    let values: Vec<(usize, f64)> = trace.iter().map(|r| (r.k, r.lagrangian)).collect();
    audit_sequence(&values, tol_mono)
}

/// Pass/fail limits applied by [`TraceAudit::failures`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditThresholds {
    /// Absolute bound on `‖ρΣuᵢ − (A₀x − b₀)‖₂`.
    pub dual_identity: f64,
    pub tol_mono: f64,
    pub z_violation: f64,
    pub final_dx: Option<f64>,
}

impl Default for AuditThresholds {
    fn default() -> Self {
        AuditThresholds {
            dual_identity: 1e-6,
            tol_mono: TOL_MONO,
            z_violation: 1e-8,
            final_dx: None,
        }
    }
}

/// Summary numbers computed from a trace alone, so a trace file and the run
/// that produced it yield identical audits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceAudit {
    pub iterations: usize,
    pub max_dual_identity_residual: f64,
    pub monotonicity_violations: Vec<MonotoneViolation>,
    pub max_lagrangian_increase: f64,
    pub max_z_violation: f64,
    pub final_dx_norm: f64,
    pub final_consensus_residual: f64,
    pub tol_mono: f64,
}

impl TraceAudit {
    pub fn from_trace(trace: &[TraceRecord], tol_mono: f64) -> Result<Self> {
        let last = trace
            .last()
            .ok_or_else(|| QcqpError::MalformedTrace("trace is empty".into()))?;
        let (violations, max_increase) = if trace.len() >= 2 {
            let rep = audit_monotonicity(trace, tol_mono)?;
            (rep.violations, rep.max_increase)
        } else {
            (Vec::new(), 0.0)
        };
        Ok(TraceAudit {
            iterations: trace.len(),
            max_dual_identity_residual: trace.iter().map(|r| r.dual_identity_residual).fold(0.0, f64::max),
            monotonicity_violations: violations,
            max_lagrangian_increase: max_increase,
            max_z_violation: trace.iter().map(|r| r.max_z_violation).fold(0.0, f64::max),
            final_dx_norm: last.dx_norm,
            final_consensus_residual: last.consensus_residual,
            tol_mono,
        })
    }

    /// Human-readable list of failed checks; empty when everything passes.
    pub fn failures(&self, limits: &AuditThresholds) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.max_dual_identity_residual <= limits.dual_identity) {
            out.push(format!(
                "dual identity residual {:.3e} exceeds {:.3e}",
                self.max_dual_identity_residual, limits.dual_identity
            ));
        }
        if !self.monotonicity_violations.is_empty() {
            let ks: Vec<String> = self.monotonicity_violations.iter().take(10).map(|v| v.k.to_string()).collect();
            out.push(format!(
                "{} monotonicity violation(s), first at k = {}",
                self.monotonicity_violations.len(),
                ks.join(", ")
            ));
        }
        if !(self.max_z_violation <= limits.z_violation) {
            out.push(format!(
                "z-update infeasibility {:.3e} exceeds {:.3e}",
                self.max_z_violation, limits.z_violation
            ));
        }
        if let Some(limit) = limits.final_dx {
            if !(self.final_dx_norm <= limit) {
                out.push(format!("final dx_norm {:.3e} exceeds {:.3e}", self.final_dx_norm, limit));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(k: usize, l: f64) -> TraceRecord {
        TraceRecord {
            k,
            lagrangian: l,
            dx_norm: 1.0 / k as f64,
            consensus_residual: 0.0,
            dual_identity_residual: 1e-14,
            objective: l,
            max_z_violation: 0.0,
            empirical_c_ratio: 1.0,
        }
    }

    #[test]
    fn strictly_decreasing_passes() {
        let trace: Vec<_> = (1..50).map(|k| rec(k, 10.0 / k as f64)).collect();
        let rep = audit_monotonicity(&trace, TOL_MONO).unwrap();
        assert!(rep.is_monotone());
        assert_eq!(rep.pairs_checked, 48);
        assert_eq!(rep.max_increase, 0.0);
    }

    #[test]
    fn injected_increase_is_listed() {
        let mut trace: Vec<_> = (1..20).map(|k| rec(k, -(k as f64))).collect();
        trace[7].lagrangian = 5.0;
        let rep = audit_monotonicity(&trace, TOL_MONO).unwrap();
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].k, 7);
        assert_eq!(rep.violations[0].increase(), 12.0);
        assert_eq!(rep.max_increase, 12.0);
    }

    #[test]
    fn tolerance_absorbs_rounding() {
        let trace = vec![rec(1, 1000.0), rec(2, 1000.0 + 1e-7)];
        assert!(audit_monotonicity(&trace, TOL_MONO).unwrap().is_monotone());
        let trace = vec![rec(1, 1000.0), rec(2, 1000.0 + 1e-5)];
        assert!(!audit_monotonicity(&trace, TOL_MONO).unwrap().is_monotone());
    }

    #[test]
    fn short_trace_rejected() {
        assert!(audit_monotonicity(&[rec(1, 0.0)], TOL_MONO).is_err());
    }

    #[test]
    fn trace_audit_thresholds() {
        let mut trace: Vec<_> = (1..10).map(|k| rec(k, -(k as f64))).collect();
        let audit = TraceAudit::from_trace(&trace, TOL_MONO).unwrap();
        assert!(audit.failures(&AuditThresholds::default()).is_empty());
        let strict = AuditThresholds {
            final_dx: Some(1e-3),
            ..Default::default()
        };
        assert_eq!(audit.failures(&strict).len(), 1);

        trace[3].dual_identity_residual = 0.5;
        trace[4].max_z_violation = 1e-3;
        let audit = TraceAudit::from_trace(&trace, TOL_MONO).unwrap();
        assert_eq!(audit.failures(&AuditThresholds::default()).len(), 2);
    }
}
