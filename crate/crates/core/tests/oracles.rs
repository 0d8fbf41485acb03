//! Cross-checks of the numerical kernels against independent references.

use num_complex::Complex64;
use qcqp_admm::linalg::{eig_hermitian, solve_shifted_pd, CMatrix};
use qcqp_admm::oracle::{qcqp1_dense_mu, small_global_search, GLOBAL_GRID};
use qcqp_admm::qcqp1::{project, Qcqp1Problem};
use qcqp_admm::{run, Constraint, CVector, HermitianMatrix, QcqpInstance, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn cn(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
    HermitianMatrix::hermitian_part(&CMatrix::from_fn(n, n, |_, _| cn(rng)))
}

/// Characteristic polynomial coefficients `c₀..cₙ` (`cₙ = 1`) by
/// Faddeev–LeVerrier.
fn char_poly(a: &CMatrix) -> Vec<f64> {
    let n = a.nrows();
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    c[n] = Complex64::new(1.0, 0.0);
    let mut mk = CMatrix::zeros(n, n);
    for k in 1..=n {
        mk = a * &mk + CMatrix::identity(n, n) * c[n - k + 1];
        c[n - k] = -(a * &mk).trace() / k as f64;
    }
    c.iter().map(|z| z.re).collect()
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
}

/// Real roots of `p` in `[-r, r]` by sign-change scan and bisection.
fn real_roots(c: &[f64], r: f64, samples: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let xs: Vec<f64> = (0..=samples).map(|k| -r + 2.0 * r * k as f64 / samples as f64).collect();
    for w in xs.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (horner(c, lo), horner(c, hi));
        if flo == 0.0 {
            roots.push(lo);
            continue;
        }
        if flo * fhi > 0.0 {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if horner(c, mid) * horner(c, lo) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots
}

#[test]
fn eigenvalues_match_characteristic_polynomial_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..5 {
        let a = random_hermitian(&mut rng, 6);
        let eig = eig_hermitian(&a);
        let m = a.as_matrix();
        let gersh = (0..6).map(|r| (0..6).map(|c| m[(r, c)].norm()).sum::<f64>()).fold(0.0, f64::max);
        let roots = real_roots(&char_poly(m), gersh + 1.0, 20_000);
        assert_eq!(roots.len(), 6, "roots {roots:?}");
        for (ours, theirs) in eig.eigenvalues.iter().zip(&roots) {
            assert!((ours - theirs).abs() < 1e-8, "{ours} vs {theirs}");
        }
    }
}

#[test]
fn shifted_solve_multiply_back_8x8() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    for _ in 0..10 {
        let a = random_hermitian(&mut rng, 8);
        let shift = eig_hermitian(&a).lambda_min().abs() + 0.1;
        let rhs = CVector::from_fn(8, |_, _| cn(&mut rng));
        let y = solve_shifted_pd(&a, shift, &rhs).unwrap();
        let back = a.as_matrix() * &y + &y * Complex64::new(shift, 0.0);
        assert!((back - &rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
    }
}

#[test]
fn projection_never_worse_than_dense_mu_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    let mut checked = 0;
    while checked < 100 {
        let n = rng.random_range(1..=4usize);
        let mut a = random_hermitian(&mut rng, n);
        if rng.random_bool(0.5) {
            a = a.shifted(eig_hermitian(&a).lambda_min().abs() + 0.2);
        }
        let b = CVector::from_fn(n, |_, _| cn(&mut rng));
        let xf = CVector::from_fn(n, |_, _| cn(&mut rng));
        let con = Constraint::new(a.clone(), b.clone(), 0.0).unwrap();
        let c = con.value(&xf).unwrap() + 0.5;
        let v = CVector::from_fn(n, |_, _| cn(&mut rng) * 3.0);
        if con.value(&v).unwrap() <= c {
            continue;
        }
        let prob = Qcqp1Problem { a, b, c, v: v.clone() };
        let sol = project(&prob, 1e-8).unwrap();
        let oracle = qcqp1_dense_mu(&prob, 200_000).unwrap();
        let dist = (&sol.z - &v).norm_squared();
        assert!(dist <= oracle.distance + 1e-6, "solver {dist} vs oracle {}", oracle.distance);
        assert!(Constraint { c, ..con }.value(&sol.z).unwrap() - c <= 1e-8);
        assert!(sol.multiplier >= 0.0);
        checked += 1;
    }
}

#[test]
fn indefinite_diagonal_projection_agrees_with_oracle() {
    let prob = Qcqp1Problem {
        a: HermitianMatrix::from_real_diagonal(&[2.0, -1.0]),
        b: CVector::zeros(2),
        c: 1.0,
        v: CVector::from_vec(vec![Complex64::new(1.2, 0.0), Complex64::new(0.4, 0.1)]),
    };
    let sol = project(&prob, 1e-8).unwrap();
    let oracle = qcqp1_dense_mu(&prob, 1_000_000).unwrap();
    assert!(oracle.mu < 1.0);
    assert!((sol.multiplier - oracle.mu).abs() < 1e-5);
    assert!((sol.z - oracle.z).norm() < 1e-5);
}

#[test]
fn admm_never_beats_global_search_on_small_real_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    let real = |rng: &mut ChaCha8Rng| -> f64 { rng.sample(StandardNormal) };
    let mut compared = 0;
    for _ in 0..20 {
        let sym = |rng: &mut ChaCha8Rng| {
            let (p, q, r) = (real(rng), real(rng), real(rng));
            CMatrix::from_row_slice(2, 2, &[p.into(), q.into(), q.into(), r.into()])
        };
        let mut a0 = HermitianMatrix::new(sym(&mut rng)).unwrap();
        a0 = a0.shifted(eig_hermitian(&a0).lambda_min().abs() + 0.5);
        let b0 = CVector::from_fn(2, |_, _| real(&mut rng).into());
        let xf = CVector::from_fn(2, |_, _| real(&mut rng).into());
        let cons: Vec<Constraint> = (0..2)
            .map(|_| {
                let a = HermitianMatrix::new(sym(&mut rng)).unwrap();
                let b = CVector::from_fn(2, |_, _| real(&mut rng).into());
                let tmp = Constraint::new(a.clone(), b.clone(), 0.0).unwrap();
                let c = tmp.value(&xf).unwrap() + real(&mut rng).abs();
                Constraint::new(a, b, c).unwrap()
            })
            .collect();
        let inst = QcqpInstance::new(a0, b0, cons).unwrap();
        let mut inst = inst;
        inst.meta.x_feas = Some(xf.clone());

        let out = run(&inst, &SolverConfig { max_iters: 3000, ..SolverConfig::with_rho(10.0) }).unwrap();
        let feas = inst.check_feasible(&out.state.x, 1e-6).unwrap();
        let half = 1.0 + 2.0 * xf.norm().max(out.state.x.norm());
        let search = small_global_search(&inst, -half, half, GLOBAL_GRID).unwrap();
        if feas.feasible {
            let admm = inst.objective(&out.state.x).unwrap();
            assert!(search.value <= admm + 1e-4, "grid {} vs admm {admm}; grid x {:?} admm x {:?} viol {} res {}", search.value, search.x, out.state.x, feas.worst_violation, search.resolution);
            compared += 1;
        }
    }
    assert!(compared >= 10, "only {compared} feasible ADMM runs");
}
