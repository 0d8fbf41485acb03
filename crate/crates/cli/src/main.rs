mod exit;
mod replicate;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qcqp_admm::admm::audit::{AuditThresholds, TraceAudit, TOL_MONO};
use qcqp_admm::admm::c_estimate::CMode;
use qcqp_admm::admm::trace_io::{read_trace_csv, write_trace_csv, RunSummary};
use qcqp_admm::admm::{select_rho, Spectrum};
use qcqp_admm::model::FEASIBILITY_TOL;
use qcqp_admm::{generate, AdmmEngine, Execution, GenSpec, QcqpInstance, SolverConfig, Termination};

use exit::{CliError, CliResult, EXIT_AUDIT, EXIT_DIVERGED};

#[derive(Parser, Debug)]
#[command(name = "qcqp-admm", version, about = "Consensus ADMM for complex QCQPs")]
struct Cli {
    /// Size of the worker pool for the per-constraint projections.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run every projection on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a random instance with a known feasible point.
    Generate(GenerateArgs),
    /// Run the solver on an instance file.
    Solve(SolveArgs),
    /// Write the data behind the convergence plots, one CSV per curve.
    Replicate(replicate::ReplicateArgs),
    /// Audit a trace file, or rerun an instance and audit the result.
    Check(CheckArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    /// Shift A0 to be positive definite (otherwise it is drawn indefinite).
    #[arg(long)]
    pd_a0: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub(crate) struct RunArgs {
    #[arg(long, default_value_t = 10.0)]
    rho: f64,
    /// Pick rho from the descent bound; `--rho` is then the pilot value.
    #[arg(long)]
    auto_rho: bool,
    /// Constant used by `--auto-rho`: empirical, statistical or fixed:<v>.
    #[arg(long, default_value = "fixed:1", value_parser = parse_c_mode)]
    c_mode: CMode,
    #[arg(long, default_value_t = 1.1)]
    rho_safety: f64,
    /// Iterations of the pilot run used by the empirical and statistical C modes.
    #[arg(long, default_value_t = 1000)]
    pilot_iters: usize,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol_dx: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol_consensus: f64,
    /// Always run the full iteration budget.
    #[arg(long)]
    fixed_budget: bool,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long, conflicts_with = "instance")]
    trace: Option<PathBuf>,
    #[arg(long, requires = "rerun")]
    instance: Option<PathBuf>,
    #[arg(long, requires = "instance")]
    rerun: bool,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = 1e-6)]
    max_dual_residual: f64,
    #[arg(long, default_value_t = TOL_MONO)]
    tol_mono: f64,
    #[arg(long, default_value_t = 1e-8)]
    max_z_violation: f64,
    #[arg(long)]
    max_final_dx: Option<f64>,
    /// Also write the audit as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn parse_c_mode(s: &str) -> Result<CMode, String> {
    match s {
        "empirical" => Ok(CMode::Empirical),
        "statistical" => Ok(CMode::Statistical),
        _ => {
            let v = s
                .strip_prefix("fixed:")
                .ok_or_else(|| format!("expected empirical, statistical or fixed:<v>, got {s:?}"))?;
            let c: f64 = v.parse().map_err(|e| format!("bad fixed C {v:?}: {e}"))?;
            Ok(CMode::Fixed(c))
        }
    }
}

impl RunArgs {
    pub(crate) fn config(&self, execution: Execution) -> SolverConfig {
        SolverConfig {
            rho: self.rho,
            max_iters: self.iters,
            tol_dx: self.tol_dx,
            tol_consensus: self.tol_consensus,
            fixed_budget: self.fixed_budget,
            c_mode: self.c_mode,
            rho_safety: self.rho_safety,
            execution,
            ..SolverConfig::default()
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(exit::EXIT_PARAMETER) } else { ExitCode::SUCCESS };
        }
    };
    match with_pool(cli.threads, || dispatch(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

#[cfg(feature = "parallel")]
fn with_pool<F: FnOnce() -> CliResult<()> + Send>(threads: Option<usize>, f: F) -> CliResult<()> {
    match threads {
        Some(t) => {
            if t == 0 {
                return Err(CliError::parameter("--threads must be at least 1"));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::parameter(format!("cannot start thread pool: {e}")))?;
            pool.install(f)
        }
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_pool<F: FnOnce() -> CliResult<()>>(threads: Option<usize>, f: F) -> CliResult<()> {
    if threads.is_some() {
        log::warn!("built without the parallel feature; --threads is ignored");
    }
    f()
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let execution = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a, execution),
        Command::Replicate(a) => replicate::run_figure(a, execution).map(|_| ()),
        Command::Check(a) => cmd_check(a, execution),
    }
}

fn cmd_generate(args: &GenerateArgs) -> CliResult<()> {
    let (inst, x_feas) = generate(&GenSpec::new(args.n, args.m, args.pd_a0, args.seed))?;
    inst.save(&args.out).map_err(CliError::io)?;
    let spec = Spectrum::of(&inst);
    let slack = inst.check_feasible(&x_feas, FEASIBILITY_TOL)?.per_constraint_slack;
    let min_slack = slack.iter().copied().fold(f64::INFINITY, f64::min);
    let max_slack = slack.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    println!("wrote {}", args.out.display());
    println!("lambda_min(A0) = {:.6}", spec.lambda_min);
    println!("lambda_max(A0) = {:.6}", spec.lambda_max);
    println!("constraint slack at x_feas: min {min_slack:.6}, max {max_slack:.6}");
    Ok(())
}

fn load_instance(path: &Path) -> CliResult<QcqpInstance> {
    QcqpInstance::load(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

/// Applies `--auto-rho` and runs the engine.
pub(crate) fn solve_instance(
    inst: &QcqpInstance,
    run: &RunArgs,
    execution: Execution,
) -> CliResult<(SolverConfig, RunSummary, Vec<qcqp_admm::TraceRecord>)> {
    let mut config = run.config(execution);
    let selection = if run.auto_rho {
        let sel = select_rho(inst, &config, run.pilot_iters)?;
        log::info!("auto rho: C = {} gives rho = {}", sel.c, sel.rho);
        config.rho = sel.rho;
        Some(sel)
    } else {
        None
    };
    let outcome = AdmmEngine::new(inst, config.clone())?.run()?;
    let summary = RunSummary::new(inst, &config, &outcome, selection, TOL_MONO)?;
    Ok((config, summary, outcome.trace))
}

pub(crate) fn write_trace(path: &Path, trace: &[qcqp_admm::TraceRecord]) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let mut out = BufWriter::new(file);
    write_trace_csv(&mut out, trace).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    out.flush().map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn cmd_solve(args: &SolveArgs, execution: Execution) -> CliResult<()> {
    let inst = load_instance(&args.instance)?;
    let (config, summary, trace) = solve_instance(&inst, &args.run, execution)?;
    if let Some(path) = &args.trace {
        write_trace(path, &trace)?;
    }
    if let Some(path) = &args.summary {
        write_text(path, &summary.to_json()?)?;
    }
    println!("termination: {:?}", summary.termination);
    println!("iterations: {}, rho = {}", summary.iterations, config.rho);
    if let Some(l) = summary.final_lagrangian {
        println!("final L = {l:.10e}, objective = {:.10e}", summary.final_objective);
    }
    println!(
        "final x feasible: {} (worst violation {:.3e})",
        summary.final_x_feasible, summary.final_x_worst_violation
    );
    println!("monotonicity violations: {}", summary.audit.monotonicity_violations.len());
    for w in &summary.warnings {
        println!("warning: {w}");
    }
    if summary.termination == Termination::Diverged {
        return Err(CliError::new(EXIT_DIVERGED, "augmented Lagrangian diverged (unbounded below)"));
    }
    Ok(())
}

fn cmd_check(args: &CheckArgs, execution: Execution) -> CliResult<()> {
    let (audit, termination) = match (&args.trace, &args.instance) {
        (Some(path), None) => {
            let file = File::open(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
            let trace = read_trace_csv(BufReader::new(file)).map_err(CliError::io)?;
            (TraceAudit::from_trace(&trace, args.tol_mono).map_err(CliError::io)?, None)
        }
        (None, Some(path)) => {
            let inst = load_instance(path)?;
            let (_, summary, trace) = solve_instance(&inst, &args.run, execution)?;
            (TraceAudit::from_trace(&trace, args.tol_mono)?, Some(summary.termination))
        }
        _ => return Err(CliError::parameter("give either --trace or --instance with --rerun")),
    };
    let limits = AuditThresholds {
        dual_identity: args.max_dual_residual,
        tol_mono: args.tol_mono,
        z_violation: args.max_z_violation,
        final_dx: args.max_final_dx,
    };
    if let Some(path) = &args.report {
        write_text(path, &serde_json::to_string_pretty(&audit).map_err(CliError::io)?)?;
    }
    println!("iterations: {}", audit.iterations);
    println!("max dual identity residual: {:.6e}", audit.max_dual_identity_residual);
    println!(
        "monotonicity violations: {} (max increase {:.6e})",
        audit.monotonicity_violations.len(),
        audit.max_lagrangian_increase
    );
    for v in audit.monotonicity_violations.iter().take(10) {
        println!("  k = {}: {:.12e} -> {:.12e}", v.k, v.before, v.after);
    }
    println!("max z infeasibility: {:.6e}", audit.max_z_violation);
    println!("final dx_norm: {:.6e}", audit.final_dx_norm);
    println!("final consensus residual: {:.6e}", audit.final_consensus_residual);
    let failures = audit.failures(&limits);
    if !failures.is_empty() {
        for f in &failures {
            println!("FAIL: {f}");
        }
        return Err(CliError::new(EXIT_AUDIT, format!("{} audit check(s) failed", failures.len())));
    }
    println!("all audits passed");
    if termination == Some(Termination::Diverged) {
        return Err(CliError::new(EXIT_DIVERGED, "rerun diverged"));
    }
    Ok(())
}
