//! Data for the convergence plots. Every curve is a full trace CSV, so any
//! column (L, dx_norm, consensus residual) can be plotted against `k`.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use qcqp_admm::admm::audit_monotonicity;
use qcqp_admm::admm::audit::TOL_MONO;
use qcqp_admm::{generate, run, Execution, GenSpec, SolverConfig};

use crate::exit::{CliError, CliResult};
use crate::write_trace;

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Indefinite A0: L decreases without bound.
    Fig1,
    /// Positive definite A0, one curve per rho.
    Fig2,
    /// Positive definite A0, one curve per instance seed.
    Fig3,
    /// Positive definite A0, one curve per constraint count.
    Fig4,
    /// Iterate differences for a single run.
    Fig5,
}

#[derive(Args, Debug)]
pub struct ReplicateArgs {
    #[arg(value_enum)]
    figure: Figure,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Number of constraints (every figure except fig4).
    #[arg(long, default_value_t = 5)]
    m: usize,
    /// Instance seed for the single-instance figures.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Overrides the figure's default rho (10 for fig1, fig3 and fig5; 20 for fig4).
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    /// Penalty values swept by fig2.
    #[arg(long, value_delimiter = ',', default_value = "2,5,10,20")]
    rho_list: Vec<f64>,
    /// Instance seeds for fig3.
    #[arg(long, value_delimiter = ',', default_values_t = 1..=20u64)]
    seeds: Vec<u64>,
    /// Constraint counts for fig4.
    #[arg(long, value_delimiter = ',', default_value = "2,5,10,20")]
    m_list: Vec<usize>,
}

struct Curve {
    file: String,
    spec: GenSpec,
    rho: f64,
}

fn curves(args: &ReplicateArgs) -> Vec<Curve> {
    let pd = |m, seed| GenSpec::new(args.n, m, true, seed);
    match args.figure {
        Figure::Fig1 => vec![Curve {
            file: "fig1.csv".into(),
            spec: GenSpec::new(args.n, args.m, false, args.seed),
            rho: args.rho.unwrap_or(10.0),
        }],
        Figure::Fig2 => args
            .rho_list
            .iter()
            .map(|&rho| Curve {
                file: format!("fig2_rho_{rho}.csv"),
                spec: pd(args.m, args.seed),
                rho,
            })
            .collect(),
        Figure::Fig3 => args
            .seeds
            .iter()
            .map(|&seed| Curve {
                file: format!("fig3_seed_{seed}.csv"),
                spec: pd(args.m, seed),
                rho: args.rho.unwrap_or(10.0),
            })
            .collect(),
        Figure::Fig4 => args
            .m_list
            .iter()
            .map(|&m| Curve {
                file: format!("fig4_m_{m}.csv"),
                spec: pd(m, args.seed),
                rho: args.rho.unwrap_or(20.0),
            })
            .collect(),
        Figure::Fig5 => vec![Curve {
            file: "fig5.csv".into(),
            spec: pd(args.m, args.seed),
            rho: args.rho.unwrap_or(10.0),
        }],
    }
}

pub fn run_figure(args: &ReplicateArgs, execution: Execution) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(&args.out_dir).map_err(|e| CliError::io(format!("{}: {e}", args.out_dir.display())))?;
    let mut written = Vec::new();
    for curve in curves(args) {
        let (inst, _) = generate(&curve.spec)?;
        let config = SolverConfig {
            execution,
            ..SolverConfig::fixed(curve.rho, args.iters)
        };
        let out = run(&inst, &config)?;
        let path = Path::new(&args.out_dir).join(&curve.file);
        write_trace(&path, &out.trace)?;
        let mono = audit_monotonicity(&out.trace, TOL_MONO)?;
        let last = out.trace.last().map(|r| r.lagrangian).unwrap_or(out.initial_lagrangian);
        println!(
            "{}: {:?} after {} iterations, final L = {last:.6e}, monotonicity violations = {}",
            path.display(),
            out.termination,
            out.trace.len(),
            mono.violations.len()
        );
        written.push(path);
    }
    Ok(written)
}
