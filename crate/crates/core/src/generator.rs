//! Seeded random instances with a known feasible point.
//!
//! Draw order from a single ChaCha8 stream seeded with `seed`:
//! `x_feas`, then `A₀` (redrawn while it fails the definiteness requirement),
//! then `b₀`, then for each i in turn `Aᵢ`, `bᵢ`, `vᵢ`. Matrices are drawn row by
//! row. A complex standard normal has independent real and imaginary parts,
//! each N(0, 1/2), so every entry has unit variance.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{QcqpError, Result};
use crate::linalg::{eig_hermitian, CMatrix, CVector, HermitianMatrix};
use crate::model::{Constraint, InstanceMeta, QcqpInstance};

/// Attempts at drawing a strictly indefinite `A₀` before giving up.
pub const MAX_REDRAWS: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub m: usize,
    /// Shift `A₀` to be positive definite; otherwise require it indefinite.
    pub pd_a0: bool,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(n: usize, m: usize, pd_a0: bool, seed: u64) -> Self {
        GenSpec { n, m, pd_a0, seed }
    }
}

fn complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

fn complex_normal_vector<R: Rng>(rng: &mut R, n: usize) -> CVector {
    let mut v = CVector::zeros(n);
    for j in 0..n {
        v[j] = complex_normal(rng);
    }
    v
}

/// `(M + Mᴴ)/2` for `M` with i.i.d. complex standard normal entries.
fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> Result<HermitianMatrix> {
    let mut m = CMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            m[(r, c)] = complex_normal(rng);
        }
    }
    let h = CMatrix::from_fn(n, n, |r, c| (m[(r, c)] + m[(c, r)].conj()) * 0.5);
    HermitianMatrix::with_tolerance(h, 0.0)
}

/// Returns the instance together with its feasible point `x_feas`, which is
/// also stored in the instance metadata.
pub fn generate(spec: &GenSpec) -> Result<(QcqpInstance, CVector)> {
    if spec.n == 0 || spec.m == 0 {
        return Err(QcqpError::Parameter(format!(
            "generator needs n >= 1 and m >= 1, got n = {}, m = {}",
            spec.n, spec.m
        )));
    }
    let (n, m) = (spec.n, spec.m);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let x_feas = complex_normal_vector(&mut rng, n);

    let mut redraws = 0u32;
    let mut a0 = random_hermitian(&mut rng, n)?;
    let mut eig = eig_hermitian(&a0);
    let mut pd_shift = None;
    if spec.pd_a0 {
        let eps = eig.lambda_min().abs() + 1.0;
        a0 = a0.shifted(eps);
        pd_shift = Some(eps);
    } else {
        while !(eig.lambda_min() < 0.0 && eig.lambda_max() > 0.0) {
            redraws += 1;
            if redraws >= MAX_REDRAWS {
                return Err(QcqpError::InvalidInstance(format!(
                    "no indefinite A0 after {MAX_REDRAWS} draws (n = {n})"
                )));
            }
            a0 = random_hermitian(&mut rng, n)?;
            eig = eig_hermitian(&a0);
        }
    }
    let b0 = complex_normal_vector(&mut rng, n);

    let mut constraints = Vec::with_capacity(m);
    for _ in 0..m {
        let a = random_hermitian(&mut rng, n)?;
        let b = complex_normal_vector(&mut rng, n);
        let v: f64 = rng.sample(StandardNormal);
        let partial = Constraint::new(a, b, 0.0)?;
        let c = partial.value(&x_feas)? + v.abs();
        constraints.push(Constraint { c, ..partial });
    }

    let inst = QcqpInstance::new(a0, b0, constraints)?.with_meta(InstanceMeta {
        seed: Some(spec.seed),
        x_feas: Some(x_feas.clone()),
        pd_shift,
        redraws: Some(redraws),
    });
    Ok((inst, x_feas))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FEASIBILITY_TOL;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest, any, ProptestConfig};

    #[test]
    fn pd_shift_gives_margin_one() {
        let (inst, _) = generate(&GenSpec::new(10, 5, true, 1)).unwrap();
        let lmin = eig_hermitian(inst.a0()).lambda_min();
        assert!(lmin > 0.999, "lambda_min = {lmin}");
        assert!(inst.meta.pd_shift.unwrap() > 1.0);
    }

    #[test]
    fn indefinite_by_default() {
        let (inst, _) = generate(&GenSpec::new(10, 5, false, 1)).unwrap();
        let eig = eig_hermitian(inst.a0());
        assert!(eig.lambda_min() < 0.0 && eig.lambda_max() > 0.0);
        assert_eq!(inst.meta.redraws, Some(0));
    }

    #[test]
    fn one_by_one_redraws_until_cap() {
        // A 1×1 draw is never indefinite.
        assert!(matches!(
            generate(&GenSpec::new(1, 1, false, 3)),
            Err(QcqpError::InvalidInstance(_))
        ));
    }

    #[test]
    fn same_seed_same_bytes() {
        let spec = GenSpec::new(10, 5, true, 42);
        let a = generate(&spec).unwrap().0.to_json().unwrap();
        let b = generate(&spec).unwrap().0.to_json().unwrap();
        assert_eq!(a, b);
        let c = generate(&GenSpec { seed: 43, ..spec }).unwrap().0.to_json().unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_empty_spec() {
        assert!(generate(&GenSpec::new(0, 3, true, 0)).is_err());
        assert!(generate(&GenSpec::new(3, 0, true, 0)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn feasible_point_has_recorded_slack(n in 1usize..7, m in 1usize..6, seed in any::<u64>()) {
            let (inst, x) = generate(&GenSpec::new(n, m, true, seed)).unwrap();
            let rep = inst.check_feasible(&x, FEASIBILITY_TOL).unwrap();
            prop_assert!(rep.feasible);
            // Recompute |vᵢ| by replaying the stream.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let _ = complex_normal_vector(&mut rng, n);
            let _ = random_hermitian(&mut rng, n).unwrap();
            let _ = complex_normal_vector(&mut rng, n);
            for slack in rep.per_constraint_slack {
                let _ = random_hermitian(&mut rng, n).unwrap();
                let _ = complex_normal_vector(&mut rng, n);
                let v: f64 = rng.sample(StandardNormal);
                prop_assert!((slack - v.abs()).abs() <= 1e-10 * (1.0 + slack.abs()));
            }
        }

        #[test]
        fn matrices_are_exactly_hermitian(n in 1usize..6, seed in any::<u64>()) {
            let (inst, _) = generate(&GenSpec::new(n, 2, true, seed)).unwrap();
            for con in inst.constraints() {
                let a = con.a.as_matrix();
                prop_assert_eq!(a, &a.adjoint());
            }
        }
    }
}
