//! Dense complex Hermitian linear algebra.
//!
//! Everything here works on small dense matrices (n in the tens). The
//! eigendecomposition and Cholesky factorization are delegated to `nalgebra`;
//! this module pins down the contract the solver relies on: ascending
//! eigenvalues, exact Hermitian symmetry after validation, and an explicit
//! factorization handle that callers keep across iterations.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

use crate::error::{QcqpError, Result};

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

/// Per-entry absolute tolerance for `A[j,k] == conj(A[k,j])`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A validated Hermitian matrix.
///
/// Construction checks squareness, finiteness and conjugate symmetry, then
/// replaces the data with `(A + Aᴴ)/2` so downstream code sees an exactly
/// Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, HERMITIAN_TOL)
    }

    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(QcqpError::DimensionMismatch {
                context: "Hermitian matrix must be square".into(),
                expected: n,
                found: m.ncols(),
            });
        }
        for j in 0..n {
            for k in 0..n {
                let v = m[(j, k)];
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(QcqpError::NonFinite {
                        location: format!("matrix entry ({j}, {k})"),
                    });
                }
            }
        }
        for j in 0..n {
            for k in j..n {
                let deviation = (m[(j, k)] - m[(k, j)].conj()).norm();
                if deviation > tol {
                    return Err(QcqpError::NotHermitian {
                        row: j,
                        col: k,
                        deviation,
                    });
                }
            }
        }
        Ok(Self::symmetrize(m))
    }

    /// Hermitian part `(M + Mᴴ)/2` of an arbitrary square matrix.
    pub fn hermitian_part(m: &CMatrix) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "hermitian_part needs a square matrix");
        Self::symmetrize(m.clone())
    }

    fn symmetrize(m: CMatrix) -> Self {
        let n = m.nrows();
        let mut out = m;
        for j in 0..n {
            out[(j, j)] = Complex64::new(out[(j, j)].re, 0.0);
            for k in (j + 1)..n {
                let avg = (out[(j, k)] + out[(k, j)].conj()) * 0.5;
                out[(j, k)] = avg;
                out[(k, j)] = avg.conj();
            }
        }
        HermitianMatrix(out)
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix(CMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix(CMatrix::zeros(n, n))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = CMatrix::zeros(n, n);
        for (j, &d) in diag.iter().enumerate() {
            m[(j, j)] = Complex64::new(d, 0.0);
        }
        HermitianMatrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn neg(&self) -> Self {
        HermitianMatrix(-&self.0)
    }

    /// `A + shift·I`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut m = self.0.clone();
        for j in 0..m.nrows() {
            m[(j, j)] += Complex64::new(shift, 0.0);
        }
        HermitianMatrix(m)
    }

    pub fn mul_vec(&self, x: &CVector) -> CVector {
        &self.0 * x
    }
}

/// Eigenvalues in ascending order with a matching unitary basis (columns).
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub eigenvalues: Vec<f64>,
    pub basis: CMatrix,
}

impl EigDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `basisᴴ · v`
    pub fn to_eigenbasis(&self, v: &CVector) -> CVector {
        self.basis.ad_mul(v)
    }

    /// `basis · w`
    pub fn from_eigenbasis(&self, w: &CVector) -> CVector {
        &self.basis * w
    }

    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.basis.clone();
        for j in 0..n {
            let lam = self.eigenvalues[j];
            scaled.column_mut(j).scale_mut(lam);
        }
        scaled * self.basis.adjoint()
    }

    /// `‖V Λ Vᴴ − A‖_F / max(‖A‖_F, 1e-300)`
    pub fn reconstruction_error(&self, a: &HermitianMatrix) -> f64 {
        let diff = self.reconstruct() - a.as_matrix();
        diff.norm() / a.as_matrix().norm().max(1e-300)
    }

    /// `max |(VᴴV − I)_{jk}|`
    pub fn unitarity_error(&self) -> f64 {
        let n = self.dim();
        let gram = self.basis.ad_mul(&self.basis);
        let mut worst = 0.0f64;
        for j in 0..n {
            for k in 0..n {
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((gram[(j, k)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

pub fn eig_hermitian(a: &HermitianMatrix) -> EigDecomposition {
    let n = a.dim();
    if n == 0 {
        return EigDecomposition {
            eigenvalues: Vec::new(),
            basis: CMatrix::zeros(0, 0),
        };
    }
    let eig = a.as_matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
    let eigenvalues = order.iter().map(|&p| eig.eigenvalues[p]).collect();
    let mut basis = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        basis.set_column(dst, &eig.eigenvectors.column(src));
    }
    EigDecomposition { eigenvalues, basis }
}

/// Cached Cholesky factorization of `A + shift·I`.
///
/// Immutable once built; the ADMM engine builds one per run and reuses it for
/// every x-update.
#[derive(Debug, Clone)]
pub struct ShiftedFactor {
    shift: f64,
    chol: Cholesky<Complex64, Dyn>,
}

impl ShiftedFactor {
    pub fn new(a: &HermitianMatrix, shift: f64) -> Result<Self> {
        if !shift.is_finite() {
            return Err(QcqpError::Parameter(format!("shift must be finite, got {shift}")));
        }
        let chol = a
            .shifted(shift)
            .into_inner()
            .cholesky()
            .ok_or(QcqpError::NotPositiveDefinite { shift })?;
        // nalgebra takes complex square roots of the pivots, so an indefinite
        // matrix can still "factor"; a genuine factor has a positive real diagonal.
        let l = chol.l_dirty();
        let pd = (0..l.nrows()).all(|j| {
            let d = l[(j, j)];
            d.re > 0.0 && d.im.abs() <= 1e-12 * d.re
        });
        if !pd {
            return Err(QcqpError::NotPositiveDefinite { shift });
        }
        Ok(ShiftedFactor { shift, chol })
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    pub fn solve(&self, rhs: &CVector) -> Result<CVector> {
        check_len("shifted solve right-hand side", self.dim(), rhs.len())?;
        Ok(self.chol.solve(rhs))
    }
}

/// Solves `(A + shift·I) y = rhs` without keeping the factorization.
pub fn solve_shifted_pd(a: &HermitianMatrix, shift: f64, rhs: &CVector) -> Result<CVector> {
    ShiftedFactor::new(a, shift)?.solve(rhs)
}

/// `xᴴAx − 2ℜ{bᴴx}`
pub fn quad_form(a: &HermitianMatrix, b: &CVector, x: &CVector) -> Result<f64> {
    check_len("quadratic form vector b", a.dim(), b.len())?;
    check_len("quadratic form point x", a.dim(), x.len())?;
    Ok(quad_form_unchecked(a, b, x))
}

pub(crate) fn quad_form_unchecked(a: &HermitianMatrix, b: &CVector, x: &CVector) -> f64 {
    let ax = a.as_matrix() * x;
    let xax = x.dotc(&ax);
    debug_assert!(
        xax.im.abs() <= 1e-10 * (1.0 + ax.norm() * x.norm()),
        "xᴴAx has imaginary part {}",
        xax.im
    );
    xax.re - 2.0 * b.dotc(x).re
}

pub(crate) fn check_len(context: &str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(QcqpError::DimensionMismatch {
            context: context.into(),
            expected,
            found,
        });
    }
    Ok(())
}

pub(crate) fn check_finite(context: &str, v: &CVector) -> Result<()> {
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(QcqpError::NonFinite {
            location: context.into(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
        let m = CMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        HermitianMatrix::hermitian_part(&m)
    }

    fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> CVector {
        CVector::from_fn(n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::identity(3, 3);
        m[(0, 2)] = c(0.0, 1e-9);
        match HermitianMatrix::new(m) {
            Err(QcqpError::NotHermitian { row: 0, col: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn accepts_within_tolerance_and_symmetrizes() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = c(0.5, 0.25);
        m[(1, 0)] = c(0.5 + 5e-13, -0.25);
        let h = HermitianMatrix::new(m).unwrap();
        assert_eq!(h.as_matrix()[(0, 1)], h.as_matrix()[(1, 0)].conj());
    }

    #[test]
    fn rejects_nan() {
        let mut m = CMatrix::identity(2, 2);
        m[(1, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(HermitianMatrix::new(m), Err(QcqpError::NonFinite { .. })));
    }

    #[test]
    fn eig_identity() {
        let e = eig_hermitian(&HermitianMatrix::identity(3));
        for &l in &e.eigenvalues {
            assert_relative_eq!(l, 1.0, epsilon = 1e-14);
        }
        assert!(e.unitarity_error() < 1e-12);
    }

    #[test]
    fn eig_diagonal_sorted() {
        let e = eig_hermitian(&HermitianMatrix::from_real_diagonal(&[5.0, -2.0]));
        assert_relative_eq!(e.eigenvalues[0], -2.0, epsilon = 1e-14);
        assert_relative_eq!(e.eigenvalues[1], 5.0, epsilon = 1e-14);
    }

    #[test]
    fn eig_invariants_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..12 {
            let a = random_hermitian(n, &mut rng);
            let e = eig_hermitian(&a);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            assert!(e.reconstruction_error(&a) < 1e-8);
            assert!(e.unitarity_error() < 1e-10);
        }
    }

    #[test]
    fn shifted_solve_scaled_identity() {
        let y = solve_shifted_pd(&HermitianMatrix::zeros(2), 2.0, &CVector::from_vec(vec![c(4.0, 0.0), c(0.0, 0.0)]))
            .unwrap();
        assert_relative_eq!(y[0].re, 2.0, epsilon = 1e-15);
        assert_eq!(y[1], c(0.0, 0.0));

        let y = solve_shifted_pd(
            &HermitianMatrix::identity(2),
            1.0,
            &CVector::from_vec(vec![c(2.0, 2.0), c(0.0, 0.0)]),
        )
        .unwrap();
        assert_relative_eq!(y[0].re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(y[0].im, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn shifted_solve_not_pd() {
        let a = HermitianMatrix::from_real_diagonal(&[-2.0, 5.0]);
        assert!(matches!(
            ShiftedFactor::new(&a, 2.0),
            Err(QcqpError::NotPositiveDefinite { .. })
        ));
        assert!(matches!(
            ShiftedFactor::new(&a, 1.0),
            Err(QcqpError::NotPositiveDefinite { .. })
        ));
        assert!(ShiftedFactor::new(&a, 2.5).is_ok());
    }

    #[test]
    fn shifted_solve_multiply_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..100 {
            let n = if trial == 0 { 8 } else { 1 + trial % 10 };
            let a = random_hermitian(n, &mut rng);
            let shift = -eig_hermitian(&a).lambda_min() + rng.random_range(0.1..3.0);
            let rhs = random_vec(n, &mut rng);
            let y = solve_shifted_pd(&a, shift, &rhs).unwrap();
            let back = a.shifted(shift).mul_vec(&y);
            assert!((back - &rhs).norm() <= 1e-10 * rhs.norm());
        }
    }

    #[test]
    fn quad_form_cases() {
        let a = HermitianMatrix::identity(2);
        let zero = CVector::zeros(2);
        assert_eq!(quad_form(&a, &zero, &zero).unwrap(), 0.0);
        let x = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        assert_relative_eq!(quad_form(&a, &zero, &x).unwrap(), 2.0, epsilon = 1e-15);
        assert!(matches!(
            quad_form(&a, &zero, &CVector::zeros(3)),
            Err(QcqpError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn quad_form_matches_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..8 {
            let a = random_hermitian(n, &mut rng);
            let b = random_vec(n, &mut rng);
            let x = random_vec(n, &mut rng);
            let mut acc = c(0.0, 0.0);
            for j in 0..n {
                for k in 0..n {
                    acc += x[j].conj() * a.as_matrix()[(j, k)] * x[k];
                }
            }
            assert!(acc.im.abs() <= 1e-10 * (1.0 + acc.norm()));
            let mut lin = 0.0;
            for j in 0..n {
                lin += (b[j].conj() * x[j]).re;
            }
            let expected = acc.re - 2.0 * lin;
            assert_relative_eq!(quad_form(&a, &b, &x).unwrap(), expected, epsilon = 1e-12, max_relative = 1e-12);
        }
    }
}
