//! Trace CSV and run-summary JSON.
//!
//! Floats are written with 17 significant digits so a trace read back from
//! disk is bit-identical to the one in memory.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::audit::TraceAudit;
use super::rho::Spectrum;
use super::{CEstimate, RhoSelection, RunOutcome, SolverConfig, Termination, TraceRecord};
use crate::error::{QcqpError, Result};
use crate::model::{vector_to_doc, QcqpInstance, FEASIBILITY_TOL};

pub const TRACE_HEADER: &str =
    "k,L,dx_norm,consensus_residual,dual_identity_residual,objective,max_z_violation,empirical_C_ratio";

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trace_csv<W: Write>(mut out: W, trace: &[TraceRecord]) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in trace {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.k,
            format_float(r.lagrangian),
            format_float(r.dx_norm),
            format_float(r.consensus_residual),
            format_float(r.dual_identity_residual),
            format_float(r.objective),
            format_float(r.max_z_violation),
            format_float(r.empirical_c_ratio),
        )?;
    }
    Ok(())
}

pub fn trace_to_csv(trace: &[TraceRecord]) -> String {
    let mut buf = Vec::new();
    write_trace_csv(&mut buf, trace).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("trace CSV is ASCII")
}

pub fn read_trace_csv<R: BufRead>(input: R) -> Result<Vec<TraceRecord>> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| QcqpError::MalformedTrace("empty file".into()))??;
    if header.trim() != TRACE_HEADER {
        return Err(QcqpError::MalformedTrace(format!("unexpected header `{}`", header.trim())));
    }
    let mut trace = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = lineno + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(QcqpError::MalformedTrace(format!(
                "line {row}: expected 8 fields, got {}",
                fields.len()
            )));
        }
        let k = fields[0]
            .parse::<usize>()
            .map_err(|e| QcqpError::MalformedTrace(format!("line {row}: bad k `{}`: {e}", fields[0])))?;
        let mut vals = [0.0f64; 7];
        for (slot, text) in vals.iter_mut().zip(&fields[1..]) {
            *slot = text
                .parse::<f64>()
                .map_err(|e| QcqpError::MalformedTrace(format!("line {row}: bad number `{text}`: {e}")))?;
        }
        trace.push(TraceRecord {
            k,
            lagrangian: vals[0],
            dx_norm: vals[1],
            consensus_residual: vals[2],
            dual_identity_residual: vals[3],
            objective: vals[4],
            max_z_violation: vals[5],
            empirical_c_ratio: vals[6],
        });
    }
    Ok(trace)
}

/// Everything a solve run reports besides the per-iteration trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub termination: Termination,
    pub iterations: usize,
    pub initial_lagrangian: f64,
    pub final_lagrangian: Option<f64>,
    pub final_objective: f64,
    pub final_x: Vec<[f64; 2]>,
    pub final_x_worst_violation: f64,
    pub final_x_feasible: bool,
    pub config: SolverConfig,
    pub rho_selection: Option<RhoSelection>,
    pub c_estimate: CEstimate,
    pub spectrum: Spectrum,
    pub n: usize,
    pub m: usize,
    pub instance_seed: Option<u64>,
    pub audit: TraceAudit,
    pub warnings: Vec<String>,
}

impl RunSummary {
    pub fn new(
        inst: &QcqpInstance,
        config: &SolverConfig,
        outcome: &RunOutcome,
        rho_selection: Option<RhoSelection>,
        tol_mono: f64,
    ) -> Result<Self> {
        let feas = inst.check_feasible(&outcome.state.x, FEASIBILITY_TOL)?;
        Ok(RunSummary {
            termination: outcome.termination,
            iterations: outcome.trace.len(),
            initial_lagrangian: outcome.initial_lagrangian,
            final_lagrangian: outcome.trace.last().map(|r| r.lagrangian),
            final_objective: inst.objective(&outcome.state.x)?,
            final_x: vector_to_doc(&outcome.state.x),
            final_x_worst_violation: feas.worst_violation,
            final_x_feasible: feas.feasible,
            config: config.clone(),
            rho_selection,
            c_estimate: outcome.c_estimate.clone(),
            spectrum: outcome.spectrum,
            n: inst.n(),
            m: inst.m(),
            instance_seed: inst.meta.seed,
            audit: TraceAudit::from_trace(&outcome.trace, tol_mono)?,
            warnings: outcome.warnings.clone(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
