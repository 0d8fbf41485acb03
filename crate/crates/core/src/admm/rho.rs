//! Penalty-parameter bounds.
//!
//! The x-subproblem is strongly convex with modulus `2λ_min(A₀) + 2mρ`, which
//! needs `ρ > max{−λ_min/m, 0}`. The descent guarantee on the augmented
//! Lagrangian additionally needs
//! `ρ > max{−λ_min/m, (√(mC)·λ_max + max{−λ_min, 0})/m}`.

use serde::{Deserialize, Serialize};

use crate::error::{QcqpError, Result};
use crate::linalg::eig_hermitian;
use crate::model::QcqpInstance;

/// Extreme eigenvalues of `A₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl Spectrum {
    pub fn of(inst: &QcqpInstance) -> Self {
        let eig = eig_hermitian(inst.a0());
        Spectrum {
            lambda_min: eig.lambda_min(),
            lambda_max: eig.lambda_max(),
        }
    }
}

/// Smallest admissible ρ (exclusive) for a strongly convex x-update.
pub fn rho_floor(lambda_min: f64, m: usize) -> f64 {
    (-lambda_min / m as f64).max(0.0)
}

/// `γ = 2λ_min + 2mρ`, rejecting ρ at or below the floor.
pub fn strong_convexity_from_spectrum(lambda_min: f64, m: usize, rho: f64) -> Result<f64> {
    if m == 0 {
        return Err(QcqpError::Parameter("constraint count must be positive".into()));
    }
    let floor = rho_floor(lambda_min, m);
    if !(rho > floor) {
        return Err(QcqpError::Parameter(format!(
            "rho = {rho} must exceed max(-lambda_min(A0)/m, 0) = {floor} (lambda_min = {lambda_min}, m = {m})"
        )));
    }
    let gamma = 2.0 * lambda_min + 2.0 * m as f64 * rho;
    if !(gamma > 0.0) {
        return Err(QcqpError::Parameter(format!(
            "strong convexity modulus {gamma} is not positive for rho = {rho}"
        )));
    }
    Ok(gamma)
}

pub fn strong_convexity_param(inst: &QcqpInstance, rho: f64) -> Result<f64> {
    strong_convexity_from_spectrum(Spectrum::of(inst).lambda_min, inst.m(), rho)
}

/// `safety · max{−λ_min/m, (√(mC)·λ_max + max{−λ_min, 0})/m}`.
///
/// `safety = 1` returns the bound itself. If the bound is not positive
/// (only possible for `A₀ = 0`), any ρ > 0 qualifies and `safety` is returned.
pub fn recommend_rho_from_spectrum(spec: Spectrum, m: usize, c: f64, safety: f64) -> Result<f64> {
    if m == 0 {
        return Err(QcqpError::Parameter("constraint count must be positive".into()));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(QcqpError::Parameter(format!("C must be positive and finite, got {c}")));
    }
    if !(safety >= 1.0) || !safety.is_finite() {
        return Err(QcqpError::Parameter(format!("rho safety factor must be >= 1, got {safety}")));
    }
    let mf = m as f64;
    let convexity = -spec.lambda_min / mf;
    let descent = ((mf * c).sqrt() * spec.lambda_max + (-spec.lambda_min).max(0.0)) / mf;
    let bound = convexity.max(descent);
    if bound > 0.0 {
        Ok(safety * bound)
    } else {
        Ok(safety)
    }
}

pub fn recommend_rho(inst: &QcqpInstance, c: f64, safety: f64) -> Result<f64> {
    recommend_rho_from_spectrum(Spectrum::of(inst), inst.m(), c, safety)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_arithmetic() {
        assert_relative_eq!(strong_convexity_from_spectrum(1.0, 1, 1.0).unwrap(), 4.0);
        assert_relative_eq!(strong_convexity_from_spectrum(-2.0, 5, 1.0).unwrap(), 6.0);
    }

    #[test]
    fn floor_is_enforced() {
        assert!(strong_convexity_from_spectrum(-2.0, 5, 0.3).is_err());
        assert!(strong_convexity_from_spectrum(-2.0, 5, 0.4).is_err());
        assert!(strong_convexity_from_spectrum(-2.0, 5, 0.401).is_ok());
        assert!(strong_convexity_from_spectrum(1.0, 5, 0.0).is_err());
    }

    #[test]
    fn recommend_identity() {
        let spec = Spectrum { lambda_min: 1.0, lambda_max: 1.0 };
        assert_relative_eq!(recommend_rho_from_spectrum(spec, 1, 1.0, 1.0).unwrap(), 1.0);
        assert_relative_eq!(recommend_rho_from_spectrum(spec, 1, 1.0, 1.1).unwrap(), 1.1);
    }

    #[test]
    fn recommend_indefinite() {
        let spec = Spectrum { lambda_min: -2.0, lambda_max: 3.0 };
        let rho = recommend_rho_from_spectrum(spec, 5, 1.0, 1.0).unwrap();
        assert_relative_eq!(rho, (3.0 * 5f64.sqrt() + 2.0) / 5.0, epsilon = 1e-14);
        assert_relative_eq!(rho, 1.7416, epsilon = 1e-4);
    }

    #[test]
    fn recommend_rejects_bad_inputs() {
        let spec = Spectrum { lambda_min: 1.0, lambda_max: 1.0 };
        assert!(recommend_rho_from_spectrum(spec, 1, 0.0, 1.1).is_err());
        assert!(recommend_rho_from_spectrum(spec, 1, 1.0, 0.9).is_err());
    }
}
