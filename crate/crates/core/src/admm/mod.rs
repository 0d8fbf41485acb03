//! Consensus ADMM for the QCQP.
//!
//! Each constraint gets its own copy `zᵢ` of the variable. One iteration is
//!
//! ```text
//! zᵢ ← argmin ‖zᵢ − x + uᵢ‖²  s.t. constraint i          (i = 1..m, independent)
//! x  ← (A₀ + mρI)⁻¹ [b₀ + ρ Σᵢ (zᵢ + uᵢ)]
//! uᵢ ← uᵢ + zᵢ − x
//! ```
//!
//! in exactly that order. Updating the copies before `x` makes
//! `ρ Σᵢ uᵢ = A₀x − b₀` hold after every iteration, which the descent analysis
//! and [`dual_identity_residual`] rely on.

pub mod audit;
pub mod c_estimate;
pub mod rho;
pub mod trace_io;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{QcqpError, Result};
use crate::linalg::{check_len, CVector, ShiftedFactor};
use crate::model::QcqpInstance;
use crate::par::{map_indexed, Execution};
use crate::qcqp1::Qcqp1Projector;

pub use audit::{audit_monotonicity, MonotonicityReport, TraceAudit, AuditThresholds, TOL_MONO};
pub use c_estimate::{estimate_c, CAccumulator, CEstimate, CMode};
pub use rho::{recommend_rho, rho_floor, strong_convexity_param, Spectrum};

/// Divergence fires when `L⁽ᵏ⁾ < L⁽⁰⁾ − DIVERGENCE_DROP·(1 + |L⁽⁰⁾|)`.
pub const DIVERGENCE_DROP: f64 = 1e12;
/// ... or when any iterate norm exceeds this.
pub const DIVERGENCE_NORM: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub x: CVector,
    pub z: Vec<CVector>,
    /// Scaled duals.
    pub u: Vec<CVector>,
    pub k: usize,
}

impl IterateState {
    /// `x⁽⁰⁾ = x0`, `zᵢ⁽⁰⁾ = x0`, `uᵢ⁽⁰⁾ = 0`.
    pub fn initial(x0: CVector, m: usize) -> Self {
        let n = x0.len();
        IterateState {
            z: vec![x0.clone(); m],
            u: vec![CVector::zeros(n); m],
            x: x0,
            k: 0,
        }
    }

    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        check_len("iterate x", n, self.x.len())?;
        check_len("number of z copies", m, self.z.len())?;
        check_len("number of scaled duals", m, self.u.len())?;
        for (z, u) in self.z.iter().zip(&self.u) {
            check_len("iterate z", n, z.len())?;
            check_len("iterate u", n, u.len())?;
        }
        Ok(())
    }

    /// Largest Euclidean norm among x, zᵢ and uᵢ.
    pub fn max_norm(&self) -> f64 {
        self.z
            .iter()
            .chain(&self.u)
            .map(|v| v.norm())
            .fold(self.x.norm(), f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub rho: f64,
    pub max_iters: usize,
    /// Threshold on `‖x⁽ᵏ⁺¹⁾ − x⁽ᵏ⁾‖₂`.
    pub tol_dx: f64,
    /// Threshold on `Σᵢ‖zᵢ − x‖₂`.
    pub tol_consensus: f64,
    /// Run all `max_iters` iterations regardless of the tolerances.
    pub fixed_budget: bool,
    pub c_mode: CMode,
    pub rho_safety: f64,
    pub qcqp1_tol: f64,
    pub seed: Option<u64>,
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rho: 10.0,
            max_iters: 1000,
            tol_dx: 1e-8,
            tol_consensus: 1e-6,
            fixed_budget: false,
            c_mode: CMode::default(),
            rho_safety: 1.1,
            qcqp1_tol: 1e-8,
            seed: None,
            execution: Execution::default(),
        }
    }
}

impl SolverConfig {
    pub fn with_rho(rho: f64) -> Self {
        SolverConfig {
            rho,
            ..Default::default()
        }
    }

    pub fn fixed(rho: f64, iters: usize) -> Self {
        SolverConfig {
            rho,
            max_iters: iters,
            fixed_budget: true,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(QcqpError::Parameter(format!("rho must be positive, got {}", self.rho)));
        }
        if self.max_iters == 0 {
            return Err(QcqpError::Parameter("max_iters must be at least 1".into()));
        }
        if !(self.rho_safety >= 1.0) {
            return Err(QcqpError::Parameter(format!("rho_safety must be >= 1, got {}", self.rho_safety)));
        }
        if !(self.qcqp1_tol > 0.0) {
            return Err(QcqpError::Parameter(format!("qcqp1_tol must be positive, got {}", self.qcqp1_tol)));
        }
        if !(self.tol_dx >= 0.0) || !(self.tol_consensus >= 0.0) {
            return Err(QcqpError::Parameter("stopping tolerances must be non-negative".into()));
        }
        Ok(())
    }
}

/// Diagnostics for one completed iteration, evaluated on the new state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    /// Augmented Lagrangian.
    pub lagrangian: f64,
    pub dx_norm: f64,
    /// `Σᵢ‖zᵢ − x‖₂`
    pub consensus_residual: f64,
    /// `‖ρΣᵢuᵢ − (A₀x − b₀)‖₂`
    pub dual_identity_residual: f64,
    pub objective: f64,
    /// `maxᵢ max(0, gᵢ(zᵢ) − cᵢ)`
    pub max_z_violation: f64,
    /// `Σ‖dᵢ‖² / ‖Σdᵢ‖²` with `dᵢ` the dual change; 1 if all `dᵢ = 0`,
    /// infinite if only the sum vanishes.
    pub empirical_c_ratio: f64,
}

impl TraceRecord {
    pub fn is_finite(&self) -> bool {
        [
            self.lagrangian,
            self.dx_norm,
            self.consensus_residual,
            self.dual_identity_residual,
            self.objective,
            self.max_z_violation,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    BudgetExhausted,
    Diverged,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: IterateState,
    pub initial_lagrangian: f64,
    /// One record per iteration, `k = 1..`.
    pub trace: Vec<TraceRecord>,
    pub termination: Termination,
    pub c_estimate: CEstimate,
    pub spectrum: Spectrum,
    pub warnings: Vec<String>,
}

/// `xᴴA₀x − 2ℜ{b₀ᴴx} + ρ Σᵢ (‖zᵢ − x + uᵢ‖² − ‖uᵢ‖²)`
pub fn augmented_lagrangian(inst: &QcqpInstance, state: &IterateState, rho: f64) -> Result<f64> {
    state.validate(inst.n(), inst.m())?;
    Ok(lagrangian_unchecked(inst, state, rho))
}

fn lagrangian_unchecked(inst: &QcqpInstance, state: &IterateState, rho: f64) -> f64 {
    let mut penalty = 0.0;
    for (z, u) in state.z.iter().zip(&state.u) {
        penalty += (z - &state.x + u).norm_squared() - u.norm_squared();
    }
    inst.objective_unchecked(&state.x) + rho * penalty
}

/// `‖ρ Σᵢ uᵢ − (A₀x − b₀)‖₂`; zero (up to rounding) after every iteration.
pub fn dual_identity_residual(inst: &QcqpInstance, state: &IterateState, rho: f64) -> Result<f64> {
    state.validate(inst.n(), inst.m())?;
    Ok(dual_residual_unchecked(inst, state, rho))
}

fn dual_residual_unchecked(inst: &QcqpInstance, state: &IterateState, rho: f64) -> f64 {
    let mut sum_u = CVector::zeros(inst.n());
    for u in &state.u {
        sum_u += u;
    }
    let gradient = inst.a0().mul_vec(&state.x) - inst.b0();
    (sum_u.scale(rho) - gradient).norm()
}

fn consensus_residual(state: &IterateState) -> f64 {
    state.z.iter().map(|z| (z - &state.x).norm()).sum()
}

/// Engine with per-run caches: one projector per constraint and the
/// factorization of `A₀ + mρI`.
pub struct AdmmEngine<'a> {
    inst: &'a QcqpInstance,
    config: SolverConfig,
    projectors: Vec<Qcqp1Projector>,
    factor: ShiftedFactor,
    spectrum: Spectrum,
}

impl<'a> AdmmEngine<'a> {
    pub fn new(inst: &'a QcqpInstance, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let spectrum = Spectrum::of(inst);
        rho::strong_convexity_from_spectrum(spectrum.lambda_min, inst.m(), config.rho)?;
        let factor = ShiftedFactor::new(inst.a0(), inst.m() as f64 * config.rho)?;
        let projectors = map_indexed(inst.m(), config.execution, |i| {
            Qcqp1Projector::new(inst.constraints()[i].clone())
        });
        Ok(AdmmEngine {
            inst,
            config,
            projectors,
            factor,
            spectrum,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn spectrum(&self) -> Spectrum {
        self.spectrum
    }

    /// Starting point: explicit `x0`, else the instance's recorded feasible
    /// point, else zero (with a warning).
    pub fn initial_state(&self, x0: Option<CVector>) -> Result<(IterateState, Option<String>)> {
        let mut warning = None;
        let x0 = match x0.or_else(|| self.inst.meta.x_feas.clone()) {
            Some(x) => x,
            None => {
                let msg = "no feasible starting point available; starting from x = 0 \
                           (descent behaviour was characterised from feasible starts)"
                    .to_string();
                warn!("{msg}");
                warning = Some(msg);
                CVector::zeros(self.inst.n())
            }
        };
        check_len("initial point", self.inst.n(), x0.len())?;
        Ok((IterateState::initial(x0, self.inst.m()), warning))
    }

    pub fn step(&self, state: &IterateState) -> Result<(IterateState, TraceRecord)> {
        state.validate(self.inst.n(), self.inst.m())?;
        self.step_unchecked(state)
    }

    fn step_unchecked(&self, state: &IterateState) -> Result<(IterateState, TraceRecord)> {
        let inst = self.inst;
        let rho = self.config.rho;
        let tol = self.config.qcqp1_tol;

        let solutions = map_indexed(inst.m(), self.config.execution, |i| {
            self.projectors[i].project(&(&state.x - &state.u[i]), tol)
        });
        let mut z = Vec::with_capacity(inst.m());
        for sol in solutions {
            z.push(sol?.z);
        }

        // Fixed summation order over i keeps the result independent of scheduling.
        let mut acc = CVector::zeros(inst.n());
        for (zi, ui) in z.iter().zip(&state.u) {
            acc += zi;
            acc += ui;
        }
        let rhs = inst.b0() + acc.scale(rho);
        let x = self.factor.solve(&rhs)?;

        let mut u = Vec::with_capacity(inst.m());
        let mut diffs = Vec::with_capacity(inst.m());
        for (zi, ui) in z.iter().zip(&state.u) {
            let d = zi - &x;
            u.push(ui + &d);
            diffs.push(d);
        }

        let next = IterateState {
            x,
            z,
            u,
            k: state.k + 1,
        };
        let max_z_violation = next
            .z
            .iter()
            .zip(inst.constraints())
            .map(|(zi, con)| (con.value_unchecked(zi) - con.c).max(0.0))
            .fold(0.0, f64::max);
        let record = TraceRecord {
            k: next.k,
            lagrangian: lagrangian_unchecked(inst, &next, rho),
            dx_norm: (&next.x - &state.x).norm(),
            consensus_residual: consensus_residual(&next),
            dual_identity_residual: dual_residual_unchecked(inst, &next, rho),
            objective: inst.objective_unchecked(&next.x),
            max_z_violation,
            empirical_c_ratio: c_estimate::empirical_ratio(&diffs).unwrap_or(f64::INFINITY),
        };
        Ok((next, record))
    }

    pub fn run(&self) -> Result<RunOutcome> {
        let (state, warning) = self.initial_state(None)?;
        let mut outcome = self.run_from(state)?;
        outcome.warnings.extend(warning);
        Ok(outcome)
    }

    pub fn run_from(&self, initial: IterateState) -> Result<RunOutcome> {
        initial.validate(self.inst.n(), self.inst.m())?;
        let rho = self.config.rho;
        let l0 = lagrangian_unchecked(self.inst, &initial, rho);
        let divergence_level = l0 - DIVERGENCE_DROP * (1.0 + l0.abs());
        let mut acc = CAccumulator::new(self.inst.m());
        let mut trace = Vec::with_capacity(self.config.max_iters);
        let mut state = initial;
        let mut termination = Termination::BudgetExhausted;

        for _ in 0..self.config.max_iters {
            let (next, record) = self.step_unchecked(&state)?;
            let diffs: Vec<CVector> = next.u.iter().zip(&state.u).map(|(a, b)| a - b).collect();
            acc.push(&diffs)?;
            state = next;
            trace.push(record);

            if !record.is_finite()
                || record.lagrangian < divergence_level
                || state.max_norm() > DIVERGENCE_NORM
            {
                termination = Termination::Diverged;
                break;
            }
            if !self.config.fixed_budget
                && record.dx_norm <= self.config.tol_dx
                && record.consensus_residual <= self.config.tol_consensus
            {
                termination = Termination::Converged;
                break;
            }
        }

        Ok(RunOutcome {
            state,
            initial_lagrangian: l0,
            trace,
            termination,
            c_estimate: acc.finish(),
            spectrum: self.spectrum,
            warnings: Vec::new(),
        })
    }
}

/// One iteration from `state`. Builds fresh caches; use [`AdmmEngine`] for loops.
pub fn step(inst: &QcqpInstance, state: &IterateState, config: &SolverConfig) -> Result<(IterateState, TraceRecord)> {
    AdmmEngine::new(inst, config.clone())?.step(state)
}

pub fn run(inst: &QcqpInstance, config: &SolverConfig) -> Result<RunOutcome> {
    AdmmEngine::new(inst, config.clone())?.run()
}

/// Outcome of automatic ρ selection from a pilot run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoSelection {
    pub rho: f64,
    pub c: f64,
    pub c_mode: CMode,
    pub pilot_rho: f64,
    pub pilot_iters: usize,
    pub pilot_estimate: Option<CEstimate>,
}

/// Picks ρ from the descent bound. Empirical and statistical modes first run
/// `pilot_iters` iterations at `config.rho` to collect dual differences.
pub fn select_rho(inst: &QcqpInstance, config: &SolverConfig, pilot_iters: usize) -> Result<RhoSelection> {
    let (c, pilot_estimate, iters) = match config.c_mode {
        CMode::Fixed(c) => (c, None, 0),
        mode => {
            let pilot = SolverConfig {
                max_iters: pilot_iters.max(1),
                fixed_budget: true,
                ..config.clone()
            };
            let outcome = run(inst, &pilot)?;
            (outcome.c_estimate.value(mode), Some(outcome.c_estimate), pilot.max_iters)
        }
    };
    let rho = recommend_rho(inst, c, config.rho_safety)?;
    Ok(RhoSelection {
        rho,
        c,
        c_mode: config.c_mode,
        pilot_rho: config.rho,
        pilot_iters: iters,
        pilot_estimate,
    })
}
