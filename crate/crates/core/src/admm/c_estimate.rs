//! Estimates of the constant `C` in `Σᵢ‖dᵢ‖² ≤ C‖Σᵢdᵢ‖²`, where
//! `dᵢ = uᵢ⁽ᵏ⁺¹⁾ − uᵢ⁽ᵏ⁾`.
//!
//! Two estimators are kept side by side:
//! * empirical: the largest observed ratio `Σ‖dᵢ‖² / ‖Σdᵢ‖²`;
//! * statistical: treating all entries of the `dᵢ` as i.i.d. with mean `μ` and
//!   variance `σ²`, `C = (σ² + |μ|²)/(σ² + m|μ|²)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QcqpError, Result};
use crate::linalg::CVector;

/// How the descent bound's constant is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode", content = "value")]
pub enum CMode {
    Fixed(f64),
    Empirical,
    Statistical,
}

impl Default for CMode {
    fn default() -> Self {
        CMode::Fixed(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CEstimate {
    pub mu_hat: [f64; 2],
    pub sigma2_hat: f64,
    pub c_statistical: f64,
    pub c_empirical_max: f64,
    /// Every `dᵢ` was zero, so any C works; both estimates fall back to 1.
    pub degenerate: bool,
    /// Iterations where `Σdᵢ = 0` but some `dᵢ ≠ 0` (ratio unbounded); skipped.
    pub unbounded_iterations: usize,
    pub iterations: usize,
    pub samples: usize,
}

impl CEstimate {
    pub fn value(&self, mode: CMode) -> f64 {
        match mode {
            CMode::Fixed(c) => c,
            CMode::Empirical => self.c_empirical_max,
            CMode::Statistical => self.c_statistical,
        }
    }
}

/// `Σ‖dᵢ‖² / ‖Σdᵢ‖²` for one iteration. `None` when the denominator vanishes.
pub fn empirical_ratio(diffs: &[CVector]) -> Option<f64> {
    let (num, den) = ratio_parts(diffs);
    if num == 0.0 {
        Some(1.0)
    } else if den > 0.0 {
        Some(num / den)
    } else {
        None
    }
}

fn ratio_parts(diffs: &[CVector]) -> (f64, f64) {
    let n = diffs.first().map_or(0, |d| d.len());
    let mut total = CVector::zeros(n);
    let mut num = 0.0;
    for d in diffs {
        num += d.norm_squared();
        total += d;
    }
    (num, total.norm_squared())
}

/// Streaming accumulator; feed it one iteration of `dᵢ` at a time.
#[derive(Debug, Clone)]
pub struct CAccumulator {
    m: usize,
    count: usize,
    mean: Complex64,
    m2: f64,
    max_ratio: Option<f64>,
    nonzero_seen: bool,
    unbounded: usize,
    iterations: usize,
}

impl CAccumulator {
    pub fn new(m: usize) -> Self {
        CAccumulator {
            m,
            count: 0,
            mean: Complex64::new(0.0, 0.0),
            m2: 0.0,
            max_ratio: None,
            nonzero_seen: false,
            unbounded: 0,
            iterations: 0,
        }
    }

    pub fn push(&mut self, diffs: &[CVector]) -> Result<()> {
        if diffs.len() != self.m {
            return Err(QcqpError::DimensionMismatch {
                context: "dual differences per iteration".into(),
                expected: self.m,
                found: diffs.len(),
            });
        }
        self.iterations += 1;
        for d in diffs {
            for &x in d.iter() {
                // Welford update for complex samples: σ² = E|x − μ|².
                self.count += 1;
                let delta = x - self.mean;
                self.mean += delta / self.count as f64;
                self.m2 += (delta.conj() * (x - self.mean)).re;
            }
        }
        let (num, den) = ratio_parts(diffs);
        if num > 0.0 {
            self.nonzero_seen = true;
            if den > 0.0 {
                let r = num / den;
                self.max_ratio = Some(self.max_ratio.map_or(r, |best| best.max(r)));
            } else {
                self.unbounded += 1;
            }
        }
        Ok(())
    }

    pub fn finish(&self) -> CEstimate {
        let sigma2 = if self.count > 1 {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        } else {
            0.0
        };
        let mu2 = self.mean.norm_sqr();
        let degenerate = !self.nonzero_seen;
        let c_statistical = if degenerate || (sigma2 == 0.0 && mu2 == 0.0) {
            1.0
        } else {
            (sigma2 + mu2) / (sigma2 + self.m as f64 * mu2)
        };
        CEstimate {
            mu_hat: [self.mean.re, self.mean.im],
            sigma2_hat: sigma2,
            c_statistical,
            c_empirical_max: self.max_ratio.unwrap_or(1.0),
            degenerate,
            unbounded_iterations: self.unbounded,
            iterations: self.iterations,
            samples: self.count,
        }
    }
}

/// Estimates C from a history of dual differences, one `Vec` of m vectors per iteration.
pub fn estimate_c(history: &[Vec<CVector>]) -> Result<CEstimate> {
    let first = history
        .first()
        .ok_or_else(|| QcqpError::Parameter("C estimation needs at least one iteration".into()))?;
    if first.is_empty() {
        return Err(QcqpError::Parameter("C estimation needs at least one constraint".into()));
    }
    let mut acc = CAccumulator::new(first.len());
    for diffs in history {
        acc.push(diffs)?;
    }
    Ok(acc.finish())
}
