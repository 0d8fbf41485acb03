//! Exact projection onto one quadratic constraint set.
//!
//! Solves `min ‖z − v‖²  s.t.  zᴴAz − 2ℜ{bᴴz} ≤ c` for Hermitian, possibly
//! indefinite `A`. When `v` is infeasible the minimizer satisfies
//! `(I + μA) z = v + μb` with `I + μA ⪰ 0`, so in the eigenbasis of `A` the
//! search reduces to the scalar root of
//!
//! ```text
//! φ(μ) = Σⱼ λⱼ|wⱼ|² − 2ℜ{Σⱼ b̄ⱼ* wⱼ} − c,   wⱼ = (āⱼ + μ b̄ⱼ) / (1 + μ λⱼ)
//! ```
//!
//! which is strictly decreasing on `[0, μ_hi)`, `μ_hi = −1/λ_min` for
//! indefinite `A` and `+∞` otherwise.

use num_complex::Complex64;

use crate::error::{QcqpError, Result};
use crate::linalg::{check_len, eig_hermitian, CVector, EigDecomposition, HermitianMatrix};
use crate::model::Constraint;

/// Bisection stops once the bracket is narrower than this, relative to `1 + μ_hi`.
/// Both stopping rules sit near machine precision: with μ > 0 the projection
/// error enters the augmented Lagrangian at first order, and a looser root
/// shows up as spurious ascent of order 1e-9 once ADMM has converged.
pub const BRACKET_REL_WIDTH: f64 = 1e-15;
/// Bisection stops once `|φ| ≤ PHI_REL_TOL·(1 + |c|)`.
pub const PHI_REL_TOL: f64 = 1e-15;
pub const MAX_BISECTION_ITERS: usize = 200;
/// Upper end of the doubling search when `A ⪰ 0`.
pub const MU_CAP: f64 = 1_152_921_504_606_846_976.0; // 2^60
/// `|1 + μλⱼ|` below this marks the hard case.
pub const POLE_TOL: f64 = 1e-10;
/// Size of the deterministic nudge applied to `v` in the hard case.
pub const HARD_CASE_NUDGE: f64 = 1e-8;

/// A single projection problem `min ‖z − v‖² s.t. zᴴAz − 2ℜ{bᴴz} ≤ c`.
#[derive(Debug, Clone)]
pub struct Qcqp1Problem {
    pub a: HermitianMatrix,
    pub b: CVector,
    pub c: f64,
    pub v: CVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Qcqp1Solution {
    pub z: CVector,
    /// Multiplier of the single constraint, `μ ≥ 0`.
    pub multiplier: f64,
    pub active: bool,
    pub bisection_iters: usize,
    pub hard_case: bool,
}

/// Projector for one fixed constraint. The eigendecomposition of `A` and the
/// rotated linear term are computed once and reused for every `v`.
#[derive(Debug, Clone)]
pub struct Qcqp1Projector {
    constraint: Constraint,
    eig: EigDecomposition,
    b_rot: CVector,
}

struct Root {
    mu: f64,
    iters: usize,
}

enum Search {
    Found(Root),
    /// φ stayed positive all the way to the pole at eigen-direction `j`.
    Pole(usize),
}

impl Qcqp1Projector {
    pub fn new(constraint: Constraint) -> Self {
        let eig = eig_hermitian(&constraint.a);
        let b_rot = eig.to_eigenbasis(&constraint.b);
        Qcqp1Projector { constraint, eig, b_rot }
    }

    pub fn constraint(&self) -> &Constraint {
        &self.constraint
    }

    pub fn eig(&self) -> &EigDecomposition {
        &self.eig
    }

    /// `g(z) − c` for the KKT point `z(μ)`, given `ā = Qᴴv`.
    pub fn phi(&self, v_rot: &CVector, mu: f64) -> f64 {
        let mut quad = 0.0;
        let mut lin = 0.0;
        for j in 0..v_rot.len() {
            let w = self.rotated_component(v_rot, mu, j);
            quad += self.eig.eigenvalues[j] * w.norm_sqr();
            lin += (self.b_rot[j].conj() * w).re;
        }
        quad - 2.0 * lin - self.constraint.c
    }

    fn rotated_component(&self, v_rot: &CVector, mu: f64, j: usize) -> Complex64 {
        (v_rot[j] + self.b_rot[j] * mu) / (1.0 + mu * self.eig.eigenvalues[j])
    }

    /// `z(μ) = (I + μA)⁻¹(v + μb)`
    pub fn point_at(&self, v: &CVector, mu: f64) -> CVector {
        let v_rot = self.eig.to_eigenbasis(v);
        self.point_from_rotated(&v_rot, mu)
    }

    fn point_from_rotated(&self, v_rot: &CVector, mu: f64) -> CVector {
        let w = CVector::from_fn(v_rot.len(), |j, _| self.rotated_component(v_rot, mu, j));
        self.eig.from_eigenbasis(&w)
    }

    pub fn project(&self, v: &CVector, tol: f64) -> Result<Qcqp1Solution> {
        check_len("projection point", self.constraint.dim(), v.len())?;
        if !(tol > 0.0) {
            return Err(QcqpError::Parameter(format!("projection tolerance must be positive, got {tol}")));
        }
        if self.constraint.value_unchecked(v) <= self.constraint.c {
            return Ok(Qcqp1Solution {
                z: v.clone(),
                multiplier: 0.0,
                active: false,
                bisection_iters: 0,
                hard_case: false,
            });
        }
        let v_rot = self.eig.to_eigenbasis(v);
        match self.search(&v_rot, tol)? {
            Search::Found(root) => Ok(self.finish(&v_rot, root, false)),
            Search::Pole(j) => {
                let mut nudged = v_rot.clone();
                nudged[j] += Complex64::new(HARD_CASE_NUDGE, 0.0);
                match self.search(&nudged, tol)? {
                    Search::Found(root) => Ok(self.finish(&nudged, root, true)),
                    Search::Pole(_) => Err(QcqpError::InfeasibleSubproblem {
                        reason: "hard case persists after perturbing along the offending eigenvector".into(),
                    }),
                }
            }
        }
    }

    fn finish(&self, v_rot: &CVector, root: Root, hard_case: bool) -> Qcqp1Solution {
        Qcqp1Solution {
            z: self.point_from_rotated(v_rot, root.mu),
            multiplier: root.mu,
            active: true,
            bisection_iters: root.iters,
            hard_case,
        }
    }

    /// Brackets and bisects the root of φ, assuming φ(0) > 0.
    fn search(&self, v_rot: &CVector, tol: f64) -> Result<Search> {
        let lam_min = self.eig.lambda_min();
        let mut lo = 0.0;
        let mut hi;
        let mut pole_gap = f64::INFINITY;
        if lam_min < 0.0 {
            let pole = -1.0 / lam_min;
            // Approach the pole geometrically: 1 + μλ_min = 2^-k.
            let mut gap = 0.5;
            loop {
                hi = pole * (1.0 - gap);
                if let Some(j) = self.near_pole(hi) {
                    if self.phi(v_rot, hi) >= 0.0 {
                        return Ok(Search::Pole(j));
                    }
                }
                if self.phi(v_rot, hi) < 0.0 {
                    pole_gap = pole - hi;
                    break;
                }
                lo = hi;
                gap *= 0.5;
            }
        } else {
            hi = 1.0;
            while self.phi(v_rot, hi) >= 0.0 {
                lo = hi;
                hi *= 2.0;
                if hi > MU_CAP {
                    return Err(QcqpError::InfeasibleSubproblem {
                        reason: format!("φ(μ) > 0 for all μ ≤ 2^60 (λ_min = {lam_min:e})"),
                    });
                }
            }
        }

        let phi_tol = (PHI_REL_TOL * (1.0 + self.constraint.c.abs())).min(tol);
        // Near a pole z(μ) scales like 1/(pole − μ), so the bracket must shrink
        // relative to that gap as well.
        let width_tol = BRACKET_REL_WIDTH * (1.0 + hi).min(pole_gap);
        let mut iters = 0;
        while iters < MAX_BISECTION_ITERS && hi - lo > width_tol {
            iters += 1;
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let val = self.phi(v_rot, mid);
            if val.abs() <= phi_tol {
                return Ok(Search::Found(Root { mu: mid, iters }));
            }
            if val > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // `hi` is on the feasible side of the root.
        Ok(Search::Found(Root { mu: hi, iters }))
    }

    fn near_pole(&self, mu: f64) -> Option<usize> {
        self.eig
            .eigenvalues
            .iter()
            .position(|&lam| (1.0 + mu * lam).abs() < POLE_TOL)
    }
}

/// One-shot projection; builds the eigendecomposition on every call.
pub fn project(prob: &Qcqp1Problem, tol: f64) -> Result<Qcqp1Solution> {
    let constraint = Constraint::new(prob.a.clone(), prob.b.clone(), prob.c)?;
    Qcqp1Projector::new(constraint).project(&prob.v, tol)
}
