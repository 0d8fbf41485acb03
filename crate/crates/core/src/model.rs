//! QCQP instance data: `min xᴴA₀x − 2ℜ{b₀ᴴx}` subject to
//! `xᴴAᵢx − 2ℜ{bᵢᴴx} ≤ cᵢ`, i = 1..m.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QcqpError, Result};
use crate::linalg::{check_finite, check_len, quad_form_unchecked, CMatrix, CVector, HermitianMatrix};

/// Default absolute slack tolerance for feasibility checks.
pub const FEASIBILITY_TOL: f64 = 1e-8;

/// One quadratic inequality `zᴴAz − 2ℜ{bᴴz} ≤ c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub a: HermitianMatrix,
    pub b: CVector,
    pub c: f64,
}

impl Constraint {
    pub fn new(a: HermitianMatrix, b: CVector, c: f64) -> Result<Self> {
        check_len("constraint vector b", a.dim(), b.len())?;
        check_finite("constraint vector b", &b)?;
        if !c.is_finite() {
            return Err(QcqpError::NonFinite {
                location: "constraint bound c".into(),
            });
        }
        Ok(Constraint { a, b, c })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// `g(x) = xᴴAx − 2ℜ{bᴴx}`
    pub fn value(&self, x: &CVector) -> Result<f64> {
        check_len("constraint point", self.dim(), x.len())?;
        Ok(quad_form_unchecked(&self.a, &self.b, x))
    }

    pub(crate) fn value_unchecked(&self, x: &CVector) -> f64 {
        quad_form_unchecked(&self.a, &self.b, x)
    }

    /// `c − g(x)`; negative means violated.
    pub fn slack(&self, x: &CVector) -> Result<f64> {
        Ok(self.c - self.value(x)?)
    }
}

/// Splits `g(x) = c` into `g(x) ≤ c` and `−g(x) ≤ −c`.
pub fn expand_equality(a: &HermitianMatrix, b: &CVector, c: f64) -> Result<[Constraint; 2]> {
    let upper = Constraint::new(a.clone(), b.clone(), c)?;
    let lower = Constraint::new(a.neg(), -b, -c)?;
    Ok([upper, lower])
}

/// Generator bookkeeping carried alongside an instance.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InstanceMeta {
    pub seed: Option<u64>,
    pub x_feas: Option<CVector>,
    pub pd_shift: Option<f64>,
    pub redraws: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QcqpInstance {
    a0: HermitianMatrix,
    b0: CVector,
    constraints: Vec<Constraint>,
    pub meta: InstanceMeta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// `cᵢ − gᵢ(x)` per constraint.
    pub per_constraint_slack: Vec<f64>,
    /// `max(0, −min slack)`
    pub worst_violation: f64,
}

impl QcqpInstance {
    pub fn new(a0: HermitianMatrix, b0: CVector, constraints: Vec<Constraint>) -> Result<Self> {
        let n = a0.dim();
        if n == 0 {
            return Err(QcqpError::InvalidInstance("dimension n must be at least 1".into()));
        }
        if constraints.is_empty() {
            return Err(QcqpError::InvalidInstance("at least one constraint is required".into()));
        }
        check_len("objective vector b0", n, b0.len())?;
        check_finite("objective vector b0", &b0)?;
        for (i, con) in constraints.iter().enumerate() {
            if con.dim() != n {
                return Err(QcqpError::DimensionMismatch {
                    context: format!("constraint {} matrix", i + 1),
                    expected: n,
                    found: con.dim(),
                });
            }
        }
        Ok(QcqpInstance {
            a0,
            b0,
            constraints,
            meta: InstanceMeta::default(),
        })
    }

    pub fn with_meta(mut self, meta: InstanceMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn n(&self) -> usize {
        self.a0.dim()
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn a0(&self) -> &HermitianMatrix {
        &self.a0
    }

    pub fn b0(&self) -> &CVector {
        &self.b0
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Constraint by zero-based index.
    pub fn constraint(&self, i: usize) -> Result<&Constraint> {
        self.constraints.get(i).ok_or(QcqpError::IndexOutOfRange {
            index: i,
            count: self.m(),
        })
    }

    pub fn objective(&self, x: &CVector) -> Result<f64> {
        check_len("objective point", self.n(), x.len())?;
        Ok(self.objective_unchecked(x))
    }

    pub(crate) fn objective_unchecked(&self, x: &CVector) -> f64 {
        quad_form_unchecked(&self.a0, &self.b0, x)
    }

    /// `gᵢ(x)` for zero-based constraint index `i`.
    pub fn constraint_value(&self, i: usize, x: &CVector) -> Result<f64> {
        self.constraint(i)?.value(x)
    }

    pub fn check_feasible(&self, x: &CVector, tol: f64) -> Result<FeasibilityReport> {
        if !(tol >= 0.0) {
            return Err(QcqpError::Parameter(format!("feasibility tolerance must be >= 0, got {tol}")));
        }
        check_len("feasibility point", self.n(), x.len())?;
        let per_constraint_slack: Vec<f64> = self
            .constraints
            .iter()
            .map(|con| con.c - con.value_unchecked(x))
            .collect();
        let min_slack = per_constraint_slack.iter().copied().fold(f64::INFINITY, f64::min);
        let worst_violation = (-min_slack).max(0.0);
        Ok(FeasibilityReport {
            feasible: worst_violation <= tol,
            per_constraint_slack,
            worst_violation,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&InstanceDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDoc = serde_json::from_str(text)?;
        doc.into_instance()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

// JSON wire format. Complex scalars are `[re, im]`; matrices are arrays of rows.

type ComplexDoc = [f64; 2];

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RealDoc {
    Real(f64),
    Complex(ComplexDoc),
}

#[derive(Debug, Serialize, Deserialize)]
struct ConstraintDoc {
    #[serde(rename = "A")]
    a: Vec<Vec<ComplexDoc>>,
    b: Vec<ComplexDoc>,
    c: RealDoc,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct MetaDoc {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    x_feas: Option<Vec<ComplexDoc>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pd_shift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    redraws: Option<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceDoc {
    n: usize,
    m: usize,
    #[serde(rename = "A0")]
    a0: Vec<Vec<ComplexDoc>>,
    b0: Vec<ComplexDoc>,
    constraints: Vec<ConstraintDoc>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    meta: Option<MetaDoc>,
}

pub(crate) fn vector_to_doc(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn matrix_to_doc(m: &CMatrix) -> Vec<Vec<ComplexDoc>> {
    (0..m.nrows())
        .map(|j| (0..m.ncols()).map(|k| [m[(j, k)].re, m[(j, k)].im]).collect())
        .collect()
}

fn vector_from_doc(doc: &[ComplexDoc], n: usize, what: &str) -> Result<CVector> {
    if doc.len() != n {
        return Err(QcqpError::InvalidInstance(format!(
            "{what}: expected length {n}, got {}",
            doc.len()
        )));
    }
    Ok(CVector::from_iterator(n, doc.iter().map(|p| Complex64::new(p[0], p[1]))))
}

fn matrix_from_doc(doc: &[Vec<ComplexDoc>], n: usize, what: &str) -> Result<HermitianMatrix> {
    if doc.len() != n {
        return Err(QcqpError::InvalidInstance(format!("{what}: expected {n} rows, got {}", doc.len())));
    }
    for (j, row) in doc.iter().enumerate() {
        if row.len() != n {
            return Err(QcqpError::InvalidInstance(format!(
                "{what}: row {j} has {} entries, expected {n}",
                row.len()
            )));
        }
    }
    let m = CMatrix::from_fn(n, n, |j, k| Complex64::new(doc[j][k][0], doc[j][k][1]));
    HermitianMatrix::new(m).map_err(|e| QcqpError::InvalidInstance(format!("{what}: {e}")))
}

impl From<&QcqpInstance> for InstanceDoc {
    fn from(inst: &QcqpInstance) -> Self {
        let meta = &inst.meta;
        let meta_doc = if *meta == InstanceMeta::default() {
            None
        } else {
            Some(MetaDoc {
                seed: meta.seed,
                x_feas: meta.x_feas.as_ref().map(vector_to_doc),
                pd_shift: meta.pd_shift,
                redraws: meta.redraws,
            })
        };
        InstanceDoc {
            n: inst.n(),
            m: inst.m(),
            a0: matrix_to_doc(inst.a0.as_matrix()),
            b0: vector_to_doc(&inst.b0),
            constraints: inst
                .constraints
                .iter()
                .map(|con| ConstraintDoc {
                    a: matrix_to_doc(con.a.as_matrix()),
                    b: vector_to_doc(&con.b),
                    c: RealDoc::Real(con.c),
                })
                .collect(),
            meta: meta_doc,
        }
    }
}

impl InstanceDoc {
    fn into_instance(self) -> Result<QcqpInstance> {
        let n = self.n;
        if self.constraints.len() != self.m {
            return Err(QcqpError::InvalidInstance(format!(
                "m = {} but {} constraints listed",
                self.m,
                self.constraints.len()
            )));
        }
        let a0 = matrix_from_doc(&self.a0, n, "A0")?;
        let b0 = vector_from_doc(&self.b0, n, "b0")?;
        let mut constraints = Vec::with_capacity(self.m);
        for (i, con) in self.constraints.iter().enumerate() {
            let label = i + 1;
            let a = matrix_from_doc(&con.a, n, &format!("constraint {label} A"))?;
            let b = vector_from_doc(&con.b, n, &format!("constraint {label} b"))?;
            let c = match con.c {
                RealDoc::Real(c) => c,
                RealDoc::Complex([re, 0.0]) => re,
                RealDoc::Complex([_, im]) => {
                    return Err(QcqpError::InvalidInstance(format!(
                        "constraint {label} c must be real, imaginary part {im}"
                    )))
                }
            };
            constraints
                .push(Constraint::new(a, b, c).map_err(|e| QcqpError::InvalidInstance(format!("constraint {label}: {e}")))?);
        }
        let mut inst = QcqpInstance::new(a0, b0, constraints)?;
        if let Some(meta) = self.meta {
            inst.meta = InstanceMeta {
                seed: meta.seed,
                x_feas: meta
                    .x_feas
                    .as_deref()
                    .map(|v| vector_from_doc(v, n, "meta.x_feas"))
                    .transpose()?,
                pd_shift: meta.pd_shift,
                redraws: meta.redraws,
            };
        }
        Ok(inst)
    }
}
