use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// `minimize cᵀw  s.t.  A w = b,  G w >= h,  w_j >= 0 (j ∉ free_vars)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: DVector<f64>,
    pub eq_lhs: DMatrix<f64>,
    pub eq_rhs: DVector<f64>,
    pub ineq_lhs: DMatrix<f64>,
    pub ineq_rhs: DVector<f64>,
    pub free_vars: BTreeSet<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Resolution of an [`LpProblem`].
///
/// * `Optimal`: `primal`, `objective_value`, `dual_eq`, `dual_ineq` are set.
/// * `Infeasible`: `farkas` holds `y = [y_eq; y_ineq]` with `y_ineq >= 0`,
///   `yᵀ[A; G] <= 0` on sign-constrained variables, `= 0` on free ones, and
///   `yᵀ[b; h] > 0`. It is normalized to unit max-norm.
/// * `Unbounded`: `primal` is a feasible point and `ray` a recession
///   direction with `cᵀray < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub primal: Option<DVector<f64>>,
    pub objective_value: Option<f64>,
    pub dual_eq: Option<DVector<f64>>,
    pub dual_ineq: Option<DVector<f64>>,
    pub farkas: Option<DVector<f64>>,
    pub ray: Option<DVector<f64>>,
    /// Set at an optimum when some nonbasic column has zero reduced cost,
    /// i.e. the optimal face may contain more than one point.
    pub alternative_optima: bool,
}

impl LpProblem {
    pub fn new(
        objective: DVector<f64>,
        eq_lhs: DMatrix<f64>,
        eq_rhs: DVector<f64>,
        ineq_lhs: DMatrix<f64>,
        ineq_rhs: DVector<f64>,
        free_vars: BTreeSet<usize>,
    ) -> Result<Self> {
        let p = Self {
            objective,
            eq_lhs,
            eq_rhs,
            ineq_lhs,
            ineq_rhs,
            free_vars,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_eq(&self) -> usize {
        self.eq_rhs.len()
    }

    pub fn n_ineq(&self) -> usize {
        self.ineq_rhs.len()
    }

    pub fn is_free(&self, j: usize) -> bool {
        self.free_vars.contains(&j)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if self.eq_lhs.nrows() != self.eq_rhs.len() || self.eq_lhs.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "equality block is {}x{} with {} right-hand sides for {n} variables",
                self.eq_lhs.nrows(),
                self.eq_lhs.ncols(),
                self.eq_rhs.len()
            )));
        }
        if self.ineq_lhs.nrows() != self.ineq_rhs.len() || self.ineq_lhs.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "inequality block is {}x{} with {} right-hand sides for {n} variables",
                self.ineq_lhs.nrows(),
                self.ineq_lhs.ncols(),
                self.ineq_rhs.len()
            )));
        }
        if let Some(&j) = self.free_vars.iter().find(|&&j| j >= n) {
            return Err(Error::DimensionMismatch(format!(
                "free variable index {j} out of range"
            )));
        }
        let finite = self
            .objective
            .iter()
            .chain(self.eq_lhs.iter())
            .chain(self.eq_rhs.iter())
            .chain(self.ineq_lhs.iter())
            .chain(self.ineq_rhs.iter())
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::NonFinite("linear program"));
        }
        Ok(())
    }

    /// Largest violation of any constraint (equalities, inequalities, sign
    /// bounds) at `w`. Zero means feasible.
    pub fn max_violation(&self, w: &DVector<f64>) -> f64 {
        let eq = (&self.eq_lhs * w - &self.eq_rhs).amax();
        let ineq = (&self.ineq_rhs - &self.ineq_lhs * w)
            .iter()
            .fold(0.0_f64, |acc, &x| acc.max(x));
        let bounds = w
            .iter()
            .enumerate()
            .filter(|(j, _)| !self.is_free(*j))
            .fold(0.0_f64, |acc, (_, &x)| acc.max(-x));
        eq.max(ineq).max(bounds)
    }

    /// Magnitude of the constraint data, used to scale tolerances.
    pub fn data_scale(&self) -> f64 {
        self.eq_lhs
            .amax()
            .max(self.ineq_lhs.amax())
            .max(self.eq_rhs.amax())
            .max(self.ineq_rhs.amax())
            .max(1.0)
    }

    /// Re-check a Farkas certificate by direct arithmetic. Returns the value
    /// `yᵀ[b; h]` when every sign condition holds within `tol`.
    pub fn verify_farkas(&self, y: &DVector<f64>, tol: f64) -> Option<f64> {
        if y.len() != self.n_eq() + self.n_ineq() {
            return None;
        }
        let y_eq = y.rows(0, self.n_eq());
        let y_in = y.rows(self.n_eq(), self.n_ineq());
        if y_in.iter().any(|&v| v < -tol) {
            return None;
        }
        let combo = self.eq_lhs.tr_mul(&y_eq) + self.ineq_lhs.tr_mul(&y_in);
        for (j, &v) in combo.iter().enumerate() {
            let ok = if self.is_free(j) {
                v.abs() <= tol
            } else {
                v <= tol
            };
            if !ok {
                return None;
            }
        }
        let value = y_eq.dot(&self.eq_rhs) + y_in.dot(&self.ineq_rhs);
        (value > tol).then_some(value)
    }

    /// Dual objective `bᵀy_eq + hᵀy_ineq`.
    pub fn dual_objective(&self, y_eq: &DVector<f64>, y_ineq: &DVector<f64>) -> f64 {
        y_eq.dot(&self.eq_rhs) + y_ineq.dot(&self.ineq_rhs)
    }

    /// Largest violation of dual feasibility:
    /// `Aᵀy + Gᵀz <= c` (equality on free variables) and `z >= 0`.
    pub fn dual_violation(&self, y_eq: &DVector<f64>, y_ineq: &DVector<f64>) -> f64 {
        let combo = self.eq_lhs.tr_mul(y_eq) + self.ineq_lhs.tr_mul(y_ineq);
        let mut worst = y_ineq.iter().fold(0.0_f64, |acc, &z| acc.max(-z));
        for j in 0..self.n_vars() {
            let gap = combo[j] - self.objective[j];
            worst = worst.max(if self.is_free(j) { gap.abs() } else { gap });
        }
        worst
    }
}

/// Row-by-row construction of an [`LpProblem`].
#[derive(Debug, Clone)]
pub struct LpBuilder {
    n: usize,
    objective: Vec<f64>,
    eq_rows: Vec<f64>,
    eq_rhs: Vec<f64>,
    ge_rows: Vec<f64>,
    ge_rhs: Vec<f64>,
    free: BTreeSet<usize>,
}

impl LpBuilder {
    pub fn new(n_vars: usize) -> Self {
        Self {
            n: n_vars,
            objective: vec![0.0; n_vars],
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
            ge_rows: Vec::new(),
            ge_rhs: Vec::new(),
            free: BTreeSet::new(),
        }
    }

    pub fn minimize(mut self, c: &[f64]) -> Self {
        assert_eq!(c.len(), self.n, "objective length");
        self.objective.copy_from_slice(c);
        self
    }

    pub fn eq(mut self, row: &[f64], rhs: f64) -> Self {
        assert_eq!(row.len(), self.n, "row length");
        self.eq_rows.extend_from_slice(row);
        self.eq_rhs.push(rhs);
        self
    }

    pub fn ge(mut self, row: &[f64], rhs: f64) -> Self {
        assert_eq!(row.len(), self.n, "row length");
        self.ge_rows.extend_from_slice(row);
        self.ge_rhs.push(rhs);
        self
    }

    pub fn le(self, row: &[f64], rhs: f64) -> Self {
        let neg: Vec<f64> = row.iter().map(|x| -x).collect();
        self.ge(&neg, -rhs)
    }

    pub fn free(mut self, j: usize) -> Self {
        self.free.insert(j);
        self
    }

    pub fn free_range(mut self, range: std::ops::Range<usize>) -> Self {
        self.free.extend(range);
        self
    }

    pub fn build(self) -> Result<LpProblem> {
        let n = self.n;
        let k_eq = self.eq_rhs.len();
        let k_ge = self.ge_rhs.len();
        LpProblem::new(
            DVector::from_vec(self.objective),
            DMatrix::from_row_slice(k_eq, n, &self.eq_rows),
            DVector::from_vec(self.eq_rhs),
            DMatrix::from_row_slice(k_ge, n, &self.ge_rows),
            DVector::from_vec(self.ge_rhs),
            self.free,
        )
    }
}
