//! Brute-force references for tests and acceptance runs.
//!
//! Nothing here calls into `linalg`, `qcqp1` or `admm`. Complex data is mapped
//! to the real embedding `z = p + iq ↦ [p; q]`, `A = X + iY ↦ [[X, −Y], [Y, X]]`,
//! under which `zᴴAz = ẑᵀÂẑ` and `ℜ{bᴴz} = b̂ᵀẑ`, and all numerics are plain
//! loops over `Vec<f64>` with a cyclic Jacobi eigensolver and Gaussian
//! elimination written out below.

#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;

use crate::admm::{IterateState, SolverConfig};
use crate::error::{QcqpError, Result};
use crate::linalg::{CVector, HermitianMatrix};
use crate::model::QcqpInstance;
use crate::qcqp1::Qcqp1Problem;

/// μ-grid size used by the acceptance suite.
pub const DENSE_MU_POINTS: usize = 1_000_000;
/// Per-axis grid size for [`small_global_search`].
pub const GLOBAL_GRID: usize = 400;

type RealMatrix = Vec<Vec<f64>>;
/// `(A, b, c)` of one constraint.
type RealConstraint = (RealMatrix, Vec<f64>, f64);

fn embed_matrix(a: &HermitianMatrix) -> RealMatrix {
    let m = a.as_matrix();
    let n = m.nrows();
    let mut out = vec![vec![0.0; 2 * n]; 2 * n];
    for r in 0..n {
        for c in 0..n {
            let e = m[(r, c)];
            out[r][c] = e.re;
            out[r][c + n] = -e.im;
            out[r + n][c] = e.im;
            out[r + n][c + n] = e.re;
        }
    }
    out
}

fn embed_vector(v: &CVector) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![0.0; 2 * n];
    for j in 0..n {
        out[j] = v[j].re;
        out[j + n] = v[j].im;
    }
    out
}

fn unembed_vector(v: &[f64]) -> CVector {
    let n = v.len() / 2;
    CVector::from_fn(n, |j, _| Complex64::new(v[j], v[j + n]))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mat_vec(a: &RealMatrix, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| dot(row, x)).collect()
}

/// `xᵀAx − 2bᵀx`
fn real_quad(a: &RealMatrix, b: &[f64], x: &[f64]) -> f64 {
    dot(x, &mat_vec(a, x)) - 2.0 * dot(b, x)
}

/// Cyclic Jacobi on a real symmetric matrix. Returns eigenvalues and the
/// eigenvectors as columns of `v` (`v[row][col]`).
fn jacobi_eigen(mut a: RealMatrix) -> (Vec<f64>, RealMatrix) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off <= 1e-32 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// One constraint in the Jacobi eigenbasis of its real embedding.
struct RotatedConstraint {
    lambda: Vec<f64>,
    q: RealMatrix,
    beta: Vec<f64>,
    c: f64,
}

impl RotatedConstraint {
    fn new(a: &HermitianMatrix, b: &CVector, c: f64) -> Self {
        let (lambda, q) = jacobi_eigen(embed_matrix(a));
        let beta = Self::rotate_with(&q, &embed_vector(b));
        RotatedConstraint { lambda, q, beta, c }
    }

    fn rotate_with(q: &RealMatrix, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n).map(|j| (0..n).map(|r| q[r][j] * x[r]).sum()).collect()
    }

    fn rotate(&self, x: &[f64]) -> Vec<f64> {
        Self::rotate_with(&self.q, x)
    }

    fn unrotate(&self, w: &[f64]) -> Vec<f64> {
        self.q.iter().map(|row| dot(row, w)).collect()
    }

    fn lambda_min(&self) -> f64 {
        self.lambda.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn w(&self, alpha: &[f64], mu: f64) -> Vec<f64> {
        (0..alpha.len())
            .map(|j| (alpha[j] + mu * self.beta[j]) / (1.0 + mu * self.lambda[j]))
            .collect()
    }

    /// `g(w) − c` in rotated coordinates.
    fn excess(&self, w: &[f64]) -> f64 {
        let quad: f64 = (0..w.len()).map(|j| self.lambda[j] * w[j] * w[j]).sum();
        quad - 2.0 * dot(&self.beta, w) - self.c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMuResult {
    pub z: CVector,
    /// `‖z − v‖²`
    pub distance: f64,
    pub mu: f64,
    pub grid_points: usize,
}

/// Sweeps `μ` over `[0, μ_hi)` and keeps the closest feasible `z(μ)`.
///
/// The grid is uniform when `μ_hi = −1/λ_min` is finite; otherwise
/// `μ = t/(1 − t)` for uniform `t ∈ [0, 1)`.
pub fn qcqp1_dense_mu(prob: &Qcqp1Problem, grid_points: usize) -> Result<DenseMuResult> {
    if grid_points < 2 {
        return Err(QcqpError::Parameter("dense-mu oracle needs at least 2 grid points".into()));
    }
    let rc = RotatedConstraint::new(&prob.a, &prob.b, prob.c);
    let v_hat = embed_vector(&prob.v);
    let alpha = rc.rotate(&v_hat);
    if rc.excess(&alpha) <= 0.0 {
        return Err(QcqpError::Parameter("dense-mu oracle requires an infeasible v (active constraint)".into()));
    }
    let lmin = rc.lambda_min();
    let mu_hi = if lmin < 0.0 { -1.0 / lmin } else { f64::INFINITY };
    let feas_tol = 1e-9 * (1.0 + prob.c.abs());

    let mut best: Option<(f64, f64)> = None;
    for k in 0..grid_points {
        let t = k as f64 / grid_points as f64;
        let mu = if mu_hi.is_finite() { mu_hi * t } else { t / (1.0 - t) };
        let (mut excess, mut d) = (-prob.c, 0.0);
        for j in 0..alpha.len() {
            let w = (alpha[j] + mu * rc.beta[j]) / (1.0 + mu * rc.lambda[j]);
            excess += rc.lambda[j] * w * w - 2.0 * rc.beta[j] * w;
            d += (w - alpha[j]) * (w - alpha[j]);
        }
        if excess <= feas_tol && best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, mu));
        }
    }
    let (distance, mu) = best.ok_or_else(|| {
        QcqpError::OracleInconclusive(format!("no feasible point among {grid_points} mu samples"))
    })?;
    Ok(DenseMuResult {
        z: unembed_vector(&rc.unrotate(&rc.w(&alpha, mu))),
        distance,
        mu,
        grid_points,
    })
}

/// Exact projection by bisection on the multiplier, in the Jacobi basis.
fn reference_project(rc: &RotatedConstraint, v: &[f64]) -> Result<Vec<f64>> {
    let alpha = rc.rotate(v);
    if rc.excess(&alpha) <= 0.0 {
        return Ok(v.to_vec());
    }
    let phi = |mu: f64| rc.excess(&rc.w(&alpha, mu));
    let lmin = rc.lambda_min();
    let mut lo = 0.0;
    let mut hi = if lmin < 0.0 {
        -1.0 / lmin
    } else {
        let mut h = 1.0;
        while phi(h) > 0.0 {
            h *= 2.0;
            if h > 1e18 {
                return Err(QcqpError::OracleInconclusive("multiplier search did not bracket a root".into()));
            }
        }
        h
    };
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w = rc.w(&alpha, hi);
    if !w.iter().all(|x| x.is_finite()) || rc.excess(&w) > 1e-9 * (1.0 + rc.c.abs()) {
        return Err(QcqpError::OracleInconclusive("projection hit a pole (hard case)".into()));
    }
    Ok(rc.unrotate(&w))
}

/// Solves `Mx = r` by Gaussian elimination with partial pivoting on the real
/// embedding.
fn gauss_solve(mut m: RealMatrix, mut r: Vec<f64>) -> Result<Vec<f64>> {
    let n = r.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .expect("non-empty range");
        if m[pivot][col] == 0.0 {
            return Err(QcqpError::OracleInconclusive("singular x-update system".into()));
        }
        m.swap(col, pivot);
        r.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for k in col..n {
                    m[row][k] -= f * m[col][k];
                }
                r[row] -= f * r[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (r[row] - s) / m[row][row];
    }
    Ok(x)
}

/// One ADMM iteration (z, then x, then u) computed from scratch.
pub fn reference_step(inst: &QcqpInstance, state: &IterateState, config: &SolverConfig) -> Result<IterateState> {
    let n = inst.n();
    let m = inst.m();
    if state.x.len() != n || state.z.len() != m || state.u.len() != m || state.u.iter().any(|u| u.len() != n) {
        return Err(QcqpError::DimensionMismatch {
            context: "reference step state".into(),
            expected: n,
            found: state.x.len(),
        });
    }
    let rho = config.rho;
    let x_hat = embed_vector(&state.x);
    let u_hat: Vec<Vec<f64>> = state.u.iter().map(embed_vector).collect();

    let mut z_hat = Vec::with_capacity(m);
    for (con, u) in inst.constraints().iter().zip(&u_hat) {
        let rc = RotatedConstraint::new(&con.a, &con.b, con.c);
        let v: Vec<f64> = x_hat.iter().zip(u).map(|(x, u)| x - u).collect();
        z_hat.push(reference_project(&rc, &v)?);
    }

    let mut sys = embed_matrix(inst.a0());
    for (i, row) in sys.iter_mut().enumerate() {
        row[i] += m as f64 * rho;
    }
    let mut rhs = embed_vector(inst.b0());
    for (z, u) in z_hat.iter().zip(&u_hat) {
        for j in 0..2 * n {
            rhs[j] += rho * (z[j] + u[j]);
        }
    }
    let x_new = gauss_solve(sys, rhs)?;

    let u_new: Vec<CVector> = z_hat
        .iter()
        .zip(&u_hat)
        .map(|(z, u)| unembed_vector(&(0..2 * n).map(|j| u[j] + z[j] - x_new[j]).collect::<Vec<_>>()))
        .collect();
    Ok(IterateState {
        x: unembed_vector(&x_new),
        z: z_hat.iter().map(|z| unembed_vector(z)).collect(),
        u: u_new,
        k: state.k + 1,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSearchResult {
    pub x: CVector,
    pub value: f64,
    /// Grid spacing of the final refinement pass.
    pub resolution: f64,
}

fn real_part_only(inst: &QcqpInstance) -> Result<(RealMatrix, Vec<f64>, Vec<RealConstraint>)> {
    let n = inst.n();
    let to_real_mat = |a: &HermitianMatrix| -> Result<RealMatrix> {
        let m = a.as_matrix();
        if m.iter().any(|e| e.im != 0.0) {
            return Err(QcqpError::Parameter("global search needs real-valued data".into()));
        }
        Ok((0..n).map(|r| (0..n).map(|c| m[(r, c)].re).collect()).collect())
    };
    let to_real_vec = |v: &CVector| -> Result<Vec<f64>> {
        if v.iter().any(|e| e.im != 0.0) {
            return Err(QcqpError::Parameter("global search needs real-valued data".into()));
        }
        Ok(v.iter().map(|e| e.re).collect())
    };
    let cons = inst
        .constraints()
        .iter()
        .map(|con| Ok((to_real_mat(&con.a)?, to_real_vec(&con.b)?, con.c)))
        .collect::<Result<Vec<_>>>()?;
    Ok((to_real_mat(inst.a0())?, to_real_vec(inst.b0())?, cons))
}

/// `pts` evenly spaced points per axis over `center ± half`.
fn grid_around(center: &[f64], half: f64, pts: usize) -> Vec<Vec<f64>> {
    let coord = |c: f64, k: usize| c - half + 2.0 * half * k as f64 / (pts - 1) as f64;
    match center.len() {
        1 => (0..pts).map(|k| vec![coord(center[0], k)]).collect(),
        _ => (0..pts)
            .flat_map(|k| (0..pts).map(move |l| vec![coord(center[0], k), coord(center[1], l)]))
            .collect(),
    }
}

/// Grid search over `[lo, hi]ⁿ` for a real instance with `n ≤ 2`, followed by
/// a local pattern search from the best few well separated grid points.
pub fn small_global_search(inst: &QcqpInstance, lo: f64, hi: f64, grid: usize) -> Result<GlobalSearchResult> {
    let n = inst.n();
    if n > 2 {
        return Err(QcqpError::Parameter(format!("global search supports n <= 2, got {n}")));
    }
    if !(hi > lo) || grid < 2 {
        return Err(QcqpError::Parameter("global search needs hi > lo and at least 2 grid points".into()));
    }
    let (a0, b0, cons) = real_part_only(inst)?;
    let feasible = |x: &[f64]| cons.iter().all(|(a, b, c)| real_quad(a, b, x) <= *c);
    let value = |x: &[f64]| real_quad(&a0, &b0, x);

    let sweep = |center: &[f64], half: f64, pts: usize| -> Vec<(f64, Vec<f64>)> {
        grid_around(center, half, pts)
            .into_iter()
            .filter(|x| feasible(x))
            .map(|x| (value(&x), x))
            .collect()
    };

    let coarse_spacing = (hi - lo) / (grid - 1) as f64;
    let mut coarse = sweep(&vec![0.5 * (lo + hi); n], 0.5 * (hi - lo), grid);
    if coarse.is_empty() {
        return Err(QcqpError::OracleInconclusive("no feasible grid point".into()));
    }
    coarse.sort_by(|a, b| a.0.total_cmp(&b.0));

    // A feasible set with several components, or a thin sliver along a
    // boundary, can put the best coarse point in the wrong basin. Refine around
    // a handful of well separated candidates.
    const SEEDS: usize = 16;
    const REFINE_PTS: usize = 41;
    let mut seeds: Vec<Vec<f64>> = Vec::with_capacity(SEEDS);
    for (_, x) in &coarse {
        if seeds.len() == SEEDS {
            break;
        }
        let far = seeds.iter().all(|s| {
            s.iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) > 2.0 * coarse_spacing
        });
        if far {
            seeds.push(x.clone());
        }
    }

    // Pattern search: stay at a scale while it keeps improving, since the
    // optimum often sits in a narrow wedge between two constraint boundaries.
    const MIN_REL_SPACING: f64 = 1e-9;
    const MAX_SWEEPS: usize = 400;
    let mut best = coarse[0].clone();
    let mut resolution = coarse_spacing;
    for seed in seeds {
        let mut incumbent = (value(&seed), seed);
        let mut spacing = coarse_spacing;
        for _ in 0..MAX_SWEEPS {
            let round_best = sweep(&incumbent.1, spacing, REFINE_PTS)
                .into_iter()
                .min_by(|a, b| a.0.total_cmp(&b.0));
            if let Some(round_best) = round_best.filter(|r| r.0 < incumbent.0) {
                incumbent = round_best;
            } else {
                spacing /= 4.0;
                if spacing < MIN_REL_SPACING * coarse_spacing {
                    break;
                }
            }
        }
        resolution = resolution.min(spacing);
        if incumbent.0 < best.0 {
            best = incumbent;
        }
    }
    let (value, x) = best;
    Ok(GlobalSearchResult {
        x: CVector::from_fn(n, |j, _| Complex64::new(x[j], 0.0)),
        value,
        resolution,
    })
}
