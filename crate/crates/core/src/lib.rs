//! Consensus ADMM for general complex quadratically constrained quadratic
//! programs, with the single-constraint projection it relies on, a seeded
//! instance generator, convergence diagnostics and brute-force oracles.
//!
//! ```
//! use qcqp_admm::{generate, run, GenSpec, SolverConfig};
//!
//! let (inst, _x_feas) = generate(&GenSpec::new(6, 3, true, 7)).unwrap();
//! let out = run(&inst, &SolverConfig::fixed(10.0, 50)).unwrap();
//! assert_eq!(out.trace.len(), 50);
//! ```

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admm;
pub mod error;
pub mod generator;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod par;
pub mod qcqp1;

pub use admm::{
    augmented_lagrangian, dual_identity_residual, run, select_rho, step, AdmmEngine, IterateState, RunOutcome,
    SolverConfig, Termination, TraceRecord,
};
pub use error::{QcqpError, Result};
pub use generator::{generate, GenSpec};
pub use linalg::{CVector, HermitianMatrix};
pub use model::{Constraint, QcqpInstance};
pub use par::Execution;
