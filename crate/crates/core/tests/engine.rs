use num_complex::Complex64;
use proptest::prelude::*;
use qcqp_admm::admm::c_estimate::estimate_c;
use qcqp_admm::admm::trace_io::{read_trace_csv, trace_to_csv, RunSummary};
use qcqp_admm::admm::{audit_monotonicity, select_rho, CMode, TraceAudit, TOL_MONO};
use qcqp_admm::linalg::CVector;
use qcqp_admm::oracle::reference_step;
use qcqp_admm::{generate, run, AdmmEngine, GenSpec, IterateState, SolverConfig, Termination};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn cn_vec(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn per_iteration_invariants(seed in any::<u64>(), n in 2usize..8, m in 1usize..5, rho in 2.0f64..30.0) {
        let (inst, _) = generate(&GenSpec::new(n, m, true, seed)).unwrap();
        let engine = AdmmEngine::new(&inst, SolverConfig::fixed(rho, 1)).unwrap();
        let (mut state, _) = engine.initial_state(None).unwrap();
        let shifted = inst.a0().shifted(m as f64 * rho);
        for _ in 0..100 {
            let (next, rec) = engine.step(&state).unwrap();
            let a0x = inst.a0().mul_vec(&next.x);
            prop_assert!(rec.dual_identity_residual <= 1e-8 * (1.0 + a0x.norm() + inst.b0().norm()));
            prop_assert!(rec.max_z_violation <= 1e-8);

            let mut rhs = inst.b0().clone();
            for (z, u) in next.z.iter().zip(&state.u) {
                rhs += (z + u) * Complex64::new(rho, 0.0);
            }
            let stationarity = (shifted.mul_vec(&next.x) - &rhs).norm();
            prop_assert!(stationarity <= 1e-9 * (1.0 + rhs.norm()));
            state = next;
        }
    }

    #[test]
    fn runs_are_bit_identical(seed in any::<u64>()) {
        let (inst, _) = generate(&GenSpec::new(6, 3, true, seed)).unwrap();
        let cfg = SolverConfig::fixed(10.0, 60);
        let a = run(&inst, &cfg).unwrap();
        let b = run(&inst, &cfg).unwrap();
        prop_assert_eq!(trace_to_csv(&a.trace), trace_to_csv(&b.trace));
        prop_assert_eq!(a.state, b.state);
    }
}

#[test]
fn single_step_matches_reference_implementation() {
    let (inst, _) = generate(&GenSpec::new(3, 2, true, 11)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let state = IterateState {
        x: cn_vec(&mut rng, 3),
        z: vec![cn_vec(&mut rng, 3), cn_vec(&mut rng, 3)],
        u: vec![cn_vec(&mut rng, 3), cn_vec(&mut rng, 3)],
        k: 4,
    };
    let cfg = SolverConfig::fixed(10.0, 1);
    let (ours, _) = AdmmEngine::new(&inst, cfg.clone()).unwrap().step(&state).unwrap();
    let theirs = reference_step(&inst, &state, &cfg).unwrap();
    assert_eq!(ours.k, 5);
    assert_eq!(theirs.k, 5);
    assert!((&ours.x - &theirs.x).camax() <= 1e-9);
    for i in 0..2 {
        assert!((&ours.z[i] - &theirs.z[i]).camax() <= 1e-9);
        assert!((&ours.u[i] - &theirs.u[i]).camax() <= 1e-9);
    }
}

#[test]
fn pd_run_is_monotone_and_settles() {
    let (inst, _) = generate(&GenSpec::new(10, 5, true, 3)).unwrap();
    let out = run(&inst, &SolverConfig::fixed(10.0, 1000)).unwrap();
    assert_eq!(out.termination, Termination::BudgetExhausted);
    assert!(audit_monotonicity(&out.trace, TOL_MONO).unwrap().is_monotone());
    let last = out.trace.last().unwrap();
    assert!(last.dx_norm < 1e-4);
    assert!(last.lagrangian.is_finite());
}

#[test]
fn indefinite_objective_diverges() {
    let (inst, _) = generate(&GenSpec::new(10, 5, false, 3)).unwrap();
    let out = run(&inst, &SolverConfig::fixed(10.0, 1000)).unwrap();
    assert_eq!(out.termination, Termination::Diverged);
    assert!(out.trace.len() < 1000);
    let ls: Vec<f64> = out.trace.iter().map(|r| r.lagrangian).collect();
    assert!(ls.last().unwrap() < &out.initial_lagrangian);
    assert!(audit_monotonicity(&out.trace, TOL_MONO).unwrap().is_monotone());
}

#[test]
fn tolerance_mode_stops_early() {
    let (inst, _) = generate(&GenSpec::new(6, 2, true, 5)).unwrap();
    let cfg = SolverConfig {
        max_iters: 20_000,
        ..SolverConfig::with_rho(10.0)
    };
    let out = run(&inst, &cfg).unwrap();
    assert_eq!(out.termination, Termination::Converged);
    let last = out.trace.last().unwrap();
    assert!(last.dx_norm <= cfg.tol_dx && last.consensus_residual <= cfg.tol_consensus);
}

#[test]
fn empirical_rho_gives_monotone_trace() {
    let (inst, _) = generate(&GenSpec::new(10, 5, true, 4)).unwrap();
    let pilot = SolverConfig {
        c_mode: CMode::Empirical,
        ..SolverConfig::fixed(10.0, 300)
    };
    let sel = select_rho(&inst, &pilot, 300).unwrap();
    assert!(sel.c >= 1.0 / 5.0);
    let out = run(&inst, &SolverConfig::fixed(sel.rho, 1000)).unwrap();
    assert!(audit_monotonicity(&out.trace, TOL_MONO).unwrap().is_monotone());
}

#[test]
fn statistical_c_near_one_for_iid_normal_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let hist: Vec<Vec<CVector>> = (0..1000).map(|_| (0..5).map(|_| cn_vec(&mut rng, 10)).collect()).collect();
    let est = estimate_c(&hist).unwrap();
    // |μ̂|² ~ 1/50000, so C deviates from 1 by about 4|μ̂|².
    assert!((est.c_statistical - 1.0).abs() < 1e-3, "{}", est.c_statistical);
    assert!((est.sigma2_hat - 1.0).abs() < 0.05);
    assert!(est.c_empirical_max >= 1.0);
    assert_eq!(est.samples, 50_000);
}

#[test]
fn audit_from_csv_matches_in_memory_audit() {
    let (inst, _) = generate(&GenSpec::new(8, 4, true, 9)).unwrap();
    let cfg = SolverConfig::fixed(10.0, 200);
    let out = run(&inst, &cfg).unwrap();
    let summary = RunSummary::new(&inst, &cfg, &out, None, TOL_MONO).unwrap();
    let back = read_trace_csv(trace_to_csv(&out.trace).as_bytes()).unwrap();
    assert_eq!(TraceAudit::from_trace(&back, TOL_MONO).unwrap(), summary.audit);
    let json = summary.to_json().unwrap();
    let parsed: RunSummary = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed.audit, summary.audit);
}
