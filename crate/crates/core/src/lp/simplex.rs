use nalgebra::{DMatrix, DVector};

use super::problem::{LpOutcome, LpProblem, LpStatus};
use crate::error::{Error, Result};
use crate::tolerance::TolerancePolicy;

/// Smallest tableau entry accepted as a pivot.
const PIVOT_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    /// Original variable; `negated` marks the `w⁻` half of a split free
    /// variable.
    Var {
        index: usize,
        negated: bool,
    },
    Slack,
}

/// `Ā x = b̄, x >= 0` with `b̄ >= 0`, rows scaled to unit max-norm.
struct StandardForm {
    rows: usize,
    cols: usize,
    a: DMatrix<f64>,
    b: DVector<f64>,
    cost: DVector<f64>,
    columns: Vec<Column>,
    /// Multiplier taking a dual on a standard row back to the original row.
    row_factor: Vec<f64>,
    /// Column of the negated half for each split variable, by positive column.
    mirror: Vec<Option<usize>>,
}

impl StandardForm {
    fn from_problem(p: &LpProblem) -> Self {
        let n = p.n_vars();
        let (k_eq, k_ge) = (p.n_eq(), p.n_ineq());
        let rows = k_eq + k_ge;

        let mut columns = Vec::new();
        let mut var_cols = vec![(0usize, None::<usize>); n];
        for j in 0..n {
            let pos = columns.len();
            columns.push(Column::Var {
                index: j,
                negated: false,
            });
            let neg = p.is_free(j).then(|| {
                columns.push(Column::Var {
                    index: j,
                    negated: true,
                });
                pos + 1
            });
            var_cols[j] = (pos, neg);
        }
        let first_slack = columns.len();
        columns.extend(std::iter::repeat(Column::Slack).take(k_ge));
        let cols = columns.len();

        let mut mirror = vec![None; cols];
        for &(pos, neg) in &var_cols {
            mirror[pos] = neg;
        }

        let mut a = DMatrix::zeros(rows, cols);
        let mut b = DVector::zeros(rows);
        let mut row_factor = vec![1.0; rows];
        for r in 0..rows {
            let (coefs, rhs) = if r < k_eq {
                (p.eq_lhs.row(r), p.eq_rhs[r])
            } else {
                (p.ineq_lhs.row(r - k_eq), p.ineq_rhs[r - k_eq])
            };
            let norm = coefs.amax();
            let scale = if norm > 0.0 { 1.0 / norm } else { 1.0 };
            let sign = if rhs * scale < 0.0 { -1.0 } else { 1.0 };
            let f = sign * scale;
            for j in 0..n {
                let v = coefs[j] * f;
                let (pos, neg) = var_cols[j];
                a[(r, pos)] = v;
                if let Some(neg) = neg {
                    a[(r, neg)] = -v;
                }
            }
            if r >= k_eq {
                a[(r, first_slack + r - k_eq)] = -f;
            }
            b[r] = rhs * f;
            row_factor[r] = f;
        }

        let cost = DVector::from_iterator(
            cols,
            columns.iter().map(|c| match *c {
                Column::Var { index, negated } => {
                    if negated {
                        -p.objective[index]
                    } else {
                        p.objective[index]
                    }
                }
                Column::Slack => 0.0,
            }),
        );

        Self {
            rows,
            cols,
            a,
            b,
            cost,
            columns,
            row_factor,
            mirror,
        }
    }

    /// Map a standard-form point (structural columns only) to the original
    /// variables.
    fn to_original(&self, x: &[f64], n: usize) -> DVector<f64> {
        let mut w = DVector::zeros(n);
        for (col, c) in self.columns.iter().enumerate() {
            if let Column::Var { index, negated } = *c {
                if negated {
                    w[index] -= x[col];
                } else {
                    w[index] += x[col];
                }
            }
        }
        w
    }

    /// Column `col` of `[Ā | I]`.
    fn full_column(&self, col: usize) -> DVector<f64> {
        if col < self.cols {
            self.a.column(col).into_owned()
        } else {
            let mut e = DVector::zeros(self.rows);
            e[col - self.cols] = 1.0;
            e
        }
    }
}

/// Dense tableau over `[Ā | I_artificial | b̄]` with a reduced-cost row.
struct Tableau {
    rows: usize,
    structural: usize,
    width: usize,
    t: DMatrix<f64>,
    reduced: DVector<f64>,
    basis: Vec<usize>,
}

enum PhaseEnd {
    Optimal,
    Unbounded(usize),
}

impl Tableau {
    fn new(sf: &StandardForm) -> Self {
        let rows = sf.rows;
        let structural = sf.cols;
        let width = structural + rows;
        let mut t = DMatrix::zeros(rows, width + 1);
        t.view_mut((0, 0), (rows, structural)).copy_from(&sf.a);
        for r in 0..rows {
            t[(r, structural + r)] = 1.0;
            t[(r, width)] = sf.b[r];
        }
        Self {
            rows,
            structural,
            width,
            t,
            reduced: DVector::zeros(width + 1),
            basis: (structural..structural + rows).collect(),
        }
    }

    fn rhs(&self, r: usize) -> f64 {
        self.t[(r, self.width)]
    }

    /// Load the cost vector `c` (length `width`) and price out the basis.
    fn set_costs(&mut self, c: &[f64]) {
        let mut red = DVector::zeros(self.width + 1);
        red.rows_mut(0, self.width).copy_from_slice(c);
        for r in 0..self.rows {
            let cb = c[self.basis[r]];
            if cb != 0.0 {
                for j in 0..=self.width {
                    red[j] -= cb * self.t[(r, j)];
                }
            }
        }
        self.reduced = red;
    }

    fn pivot(&mut self, p: usize, e: usize) {
        let piv = self.t[(p, e)];
        for j in 0..=self.width {
            self.t[(p, j)] /= piv;
        }
        self.t[(p, e)] = 1.0;
        for r in 0..self.rows {
            if r == p {
                continue;
            }
            let f = self.t[(r, e)];
            if f != 0.0 {
                for j in 0..=self.width {
                    let v = self.t[(p, j)];
                    if v != 0.0 {
                        self.t[(r, j)] -= f * v;
                    }
                }
                self.t[(r, e)] = 0.0;
            }
        }
        let f = self.reduced[e];
        if f != 0.0 {
            for j in 0..=self.width {
                self.reduced[j] -= f * self.t[(p, j)];
            }
            self.reduced[e] = 0.0;
        }
        self.basis[p] = e;
    }

    /// Least-index entering column, least-index leaving variable on ratio
    /// ties.
    fn run(&mut self, allowed: usize, opt_tol: f64, pivots: &mut usize) -> Result<PhaseEnd> {
        loop {
            let entering = (0..allowed).find(|&j| self.reduced[j] < -opt_tol);
            let Some(e) = entering else {
                return Ok(PhaseEnd::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.t[(r, e)];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r).max(0.0) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((best, best_ratio)) => {
                            let tie =
                                (ratio - best_ratio).abs() <= 1e-12 * best_ratio.abs().max(1.0);
                            if (tie && self.basis[r] < self.basis[best])
                                || (!tie && ratio < best_ratio)
                            {
                                Some((r, ratio))
                            } else {
                                Some((best, best_ratio))
                            }
                        }
                    };
                }
            }
            let Some((p, _)) = leave else {
                return Ok(PhaseEnd::Unbounded(e));
            };
            self.pivot(p, e);
            *pivots += 1;
            if *pivots > MAX_PIVOTS {
                return Err(Error::Numerical("simplex pivot limit exceeded".into()));
            }
        }
    }

    /// Pivot basic artificials out wherever a structural entry allows it.
    fn expel_artificials(&mut self) {
        for r in 0..self.rows {
            if self.basis[r] < self.structural {
                continue;
            }
            let col = (0..self.structural)
                .filter(|&j| self.t[(r, j)].abs() > PIVOT_TOL)
                .max_by(|&a, &b| {
                    self.t[(r, a)]
                        .abs()
                        .total_cmp(&self.t[(r, b)].abs())
                        .then(b.cmp(&a))
                });
            if let Some(e) = col {
                self.pivot(r, e);
            }
        }
    }

    fn basic_values(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.width];
        for r in 0..self.rows {
            x[self.basis[r]] = self.rhs(r);
        }
        x
    }
}

/// Basic solution and simplex multipliers recomputed from the basis matrix
/// itself, which removes the round-off accumulated in the tableau.
struct Refined {
    x: Vec<f64>,
    y: DVector<f64>,
}

fn refine(sf: &StandardForm, tab: &Tableau, cost: &[f64]) -> Refined {
    let m = sf.rows;
    let mut basis = DMatrix::zeros(m, m);
    for (k, &col) in tab.basis.iter().enumerate() {
        basis.set_column(k, &sf.full_column(col));
    }
    let cb = DVector::from_iterator(m, tab.basis.iter().map(|&c| cost[c]));
    let lu = basis.clone().lu();
    let xb = lu.solve(&sf.b);
    let y = basis.transpose().lu().solve(&cb);
    match (xb, y) {
        (Some(xb), Some(y)) => {
            let mut x = vec![0.0; tab.width];
            for (k, &col) in tab.basis.iter().enumerate() {
                x[col] = xb[k].max(0.0);
            }
            Refined { x, y }
        }
        _ => {
            // fall back to the tableau: y_r = c_art_r − reduced_art_r
            let x = tab.basic_values().into_iter().map(|v| v.max(0.0)).collect();
            let y = DVector::from_iterator(
                m,
                (0..m).map(|r| cost[sf.cols + r] - tab.reduced[sf.cols + r]),
            );
            Refined { x, y }
        }
    }
}

struct PhaseOne {
    sf: StandardForm,
    tab: Tableau,
    feasible: bool,
    farkas: Option<DVector<f64>>,
    pivots: usize,
}

fn phase_one(problem: &LpProblem, tol: &TolerancePolicy) -> Result<PhaseOne> {
    problem.validate()?;
    tol.validate()?;
    let sf = StandardForm::from_problem(problem);
    let mut tab = Tableau::new(&sf);
    let mut cost = vec![0.0; tab.width];
    for c in cost.iter_mut().skip(sf.cols) {
        *c = 1.0;
    }
    tab.set_costs(&cost);
    let mut pivots = 0;
    tab.run(sf.cols, tol.feas_tol, &mut pivots)?;

    let infeasibility: f64 = (0..tab.rows)
        .filter(|&r| tab.basis[r] >= sf.cols)
        .map(|r| tab.rhs(r).max(0.0))
        .sum();
    let threshold = tol.scaled(sf.b.amax());
    if infeasibility <= threshold {
        return Ok(PhaseOne {
            sf,
            tab,
            feasible: true,
            farkas: None,
            pivots,
        });
    }

    let refined = refine(&sf, &tab, &cost);
    let mut y = DVector::from_iterator(
        sf.rows,
        (0..sf.rows).map(|r| refined.y[r] * sf.row_factor[r]),
    );
    let k_eq = problem.n_eq();
    for v in y.rows_mut(k_eq, problem.n_ineq()).iter_mut() {
        if *v < 0.0 && *v > -tol.feas_tol {
            *v = 0.0;
        }
    }
    let norm = y.amax();
    if norm > 0.0 {
        y /= norm;
    }
    Ok(PhaseOne {
        sf,
        tab,
        feasible: false,
        farkas: Some(y),
        pivots,
    })
}

/// Solve `problem` to optimality, or certify infeasibility or unboundedness.
pub fn solve(problem: &LpProblem, tol: &TolerancePolicy) -> Result<LpOutcome> {
    let PhaseOne {
        sf,
        mut tab,
        feasible,
        farkas,
        mut pivots,
    } = phase_one(problem, tol)?;
    let n = problem.n_vars();
    if !feasible {
        return Ok(LpOutcome {
            status: LpStatus::Infeasible,
            primal: None,
            objective_value: None,
            dual_eq: None,
            dual_ineq: None,
            farkas,
            ray: None,
            alternative_optima: false,
        });
    }

    tab.expel_artificials();
    let mut cost = vec![0.0; tab.width];
    cost[..sf.cols].copy_from_slice(sf.cost.as_slice());
    tab.set_costs(&cost);
    let opt_tol = tol.scaled(sf.cost.amax());

    match tab.run(sf.cols, opt_tol, &mut pivots)? {
        PhaseEnd::Unbounded(e) => {
            let x = tab.basic_values();
            let primal = sf.to_original(&x[..sf.cols], n);
            let mut dir = vec![0.0; tab.width];
            dir[e] = 1.0;
            for r in 0..tab.rows {
                dir[tab.basis[r]] -= tab.t[(r, e)];
            }
            let ray = sf.to_original(&dir[..sf.cols], n);
            let norm = ray.amax();
            let ray = if norm > 0.0 { ray / norm } else { ray };
            Ok(LpOutcome {
                status: LpStatus::Unbounded,
                primal: Some(primal),
                objective_value: None,
                dual_eq: None,
                dual_ineq: None,
                farkas: None,
                ray: Some(ray),
                alternative_optima: false,
            })
        }
        PhaseEnd::Optimal => {
            let refined = refine(&sf, &tab, &cost);
            let primal = sf.to_original(&refined.x[..sf.cols], n);
            let y = DVector::from_iterator(
                sf.rows,
                (0..sf.rows).map(|r| refined.y[r] * sf.row_factor[r]),
            );
            let k_eq = problem.n_eq();
            let dual_eq = y.rows(0, k_eq).into_owned();
            let dual_ineq =
                y.rows(k_eq, problem.n_ineq())
                    .map(|v| if v < 0.0 && v > -opt_tol { 0.0 } else { v });

            let mut in_basis = vec![false; tab.width];
            for &b in &tab.basis {
                in_basis[b] = true;
            }
            let reduced = &sf.cost - sf.a.tr_mul(&refined.y);
            let alternative_optima = (0..sf.cols).any(|j| {
                if in_basis[j] {
                    return false;
                }
                // the negated half of a basic split variable always prices out at zero
                let partner_basic = match sf.columns[j] {
                    Column::Var { negated: true, .. } => sf
                        .mirror
                        .iter()
                        .position(|m| *m == Some(j))
                        .is_some_and(|pos| in_basis[pos]),
                    Column::Var { negated: false, .. } => {
                        sf.mirror[j].is_some_and(|neg| in_basis[neg])
                    }
                    Column::Slack => false,
                };
                !partner_basic && reduced[j].abs() <= opt_tol
            });

            let objective_value = problem.objective.dot(&primal);
            log::trace!("simplex optimal after {pivots} pivots, objective {objective_value}");
            Ok(LpOutcome {
                status: LpStatus::Optimal,
                primal: Some(primal),
                objective_value: Some(objective_value),
                dual_eq: Some(dual_eq),
                dual_ineq: Some(dual_ineq),
                farkas: None,
                ray: None,
                alternative_optima,
            })
        }
    }
}

/// Phase I only: a point satisfying every constraint, or `None` when the
/// problem is infeasible (the certificate is then available from [`solve`]).
pub fn feasible_point(problem: &LpProblem, tol: &TolerancePolicy) -> Result<Option<DVector<f64>>> {
    let PhaseOne {
        sf, tab, feasible, ..
    } = phase_one(problem, tol)?;
    if !feasible {
        return Ok(None);
    }
    let zero_cost = vec![0.0; tab.width];
    let refined = refine(&sf, &tab, &zero_cost);
    Ok(Some(
        sf.to_original(&refined.x[..sf.cols], problem.n_vars()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::LpBuilder;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    #[test]
    fn lower_bound_is_attained() {
        let p = LpBuilder::new(1)
            .minimize(&[1.0])
            .ge(&[1.0], 1.0)
            .build()
            .unwrap();
        let out = solve(&p, &tol()).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.primal.unwrap()[0] - 1.0).abs() < 1e-12);
        assert!((out.objective_value.unwrap() - 1.0).abs() < 1e-12);
        assert!((out.dual_ineq.unwrap()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_has_ray() {
        let p = LpBuilder::new(1).minimize(&[-1.0]).build().unwrap();
        let out = solve(&p, &tol()).unwrap();
        assert_eq!(out.status, LpStatus::Unbounded);
        let ray = out.ray.unwrap();
        assert!(ray[0] > 0.0);
        assert!(out.primal.is_some());
    }

    #[test]
    fn contradictory_equalities() {
        let p = LpBuilder::new(1)
            .eq(&[1.0], 1.0)
            .eq(&[1.0], 2.0)
            .free(0)
            .build()
            .unwrap();
        let out = solve(&p, &tol()).unwrap();
        assert_eq!(out.status, LpStatus::Infeasible);
        let y = out.farkas.unwrap();
        let value = p.verify_farkas(&y, 1e-9).expect("certificate verifies");
        assert!(value > 0.0);
        assert!((y[0] + y[1]).abs() < 1e-12);
    }

    #[test]
    fn feasible_point_examples() {
        let p = LpBuilder::new(1).ge(&[1.0], 3.0).build().unwrap();
        let w = feasible_point(&p, &tol()).unwrap().unwrap();
        assert!(w[0] >= 3.0 - 1e-12);

        let p = LpBuilder::new(1).ge(&[-1.0], 1.0).build().unwrap();
        assert!(feasible_point(&p, &tol()).unwrap().is_none());
        let out = solve(&p, &tol()).unwrap();
        assert!(p
            .verify_farkas(out.farkas.as_ref().unwrap(), 1e-9)
            .is_some());

        let p = LpBuilder::new(2)
            .eq(&[1.0, 0.0], 2.0)
            .eq(&[0.0, 1.0], 5.0)
            .build()
            .unwrap();
        let w = feasible_point(&p, &tol()).unwrap().unwrap();
        assert!((w[0] - 2.0).abs() < 1e-12 && (w[1] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn free_variables_and_duals() {
        // min w0 + w1 s.t. w0 - w1 = 1, w0 >= -3 (free w0), w1 >= 0
        let p = LpBuilder::new(2)
            .minimize(&[1.0, 1.0])
            .eq(&[1.0, -1.0], 1.0)
            .ge(&[1.0, 0.0], -3.0)
            .free(0)
            .build()
            .unwrap();
        let out = solve(&p, &tol()).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        let w = out.primal.clone().unwrap();
        assert!((w[0] - 1.0).abs() < 1e-12 && w[1].abs() < 1e-12);
        let (ye, yi) = (out.dual_eq.unwrap(), out.dual_ineq.unwrap());
        assert!(p.dual_violation(&ye, &yi) < 1e-12);
        assert!((p.dual_objective(&ye, &yi) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        let p = LpBuilder::new(2)
            .minimize(&[1.0, 2.0])
            .eq(&[1.0, 1.0], 1.0)
            .eq(&[2.0, 2.0], 2.0)
            .build()
            .unwrap();
        let out = solve(&p, &tol()).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective_value.unwrap() - 1.0).abs() < 1e-12);
        let (ye, yi) = (out.dual_eq.unwrap(), out.dual_ineq.unwrap());
        assert!((p.dual_objective(&ye, &yi) - 1.0).abs() < 1e-12);
        assert!(p.dual_violation(&ye, &yi) < 1e-12);
    }

    #[test]
    fn zero_row_with_nonzero_rhs_is_infeasible() {
        let p = LpBuilder::new(2).eq(&[0.0, 0.0], 1.0).build().unwrap();
        let out = solve(&p, &tol()).unwrap();
        assert_eq!(out.status, LpStatus::Infeasible);
        assert!(p
            .verify_farkas(out.farkas.as_ref().unwrap(), 1e-9)
            .is_some());
    }

    #[test]
    fn deterministic() {
        let p = LpBuilder::new(3)
            .minimize(&[1.0, -2.0, 0.5])
            .ge(&[1.0, 1.0, 1.0], 1.0)
            .le(&[1.0, 2.0, 0.0], 4.0)
            .build()
            .unwrap();
        let a = solve(&p, &tol()).unwrap();
        let b = solve(&p, &tol()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn flags_alternative_optima() {
        // min w0 + w1 s.t. w0 + w1 >= 1: the whole segment is optimal
        let p = LpBuilder::new(2)
            .minimize(&[1.0, 1.0])
            .ge(&[1.0, 1.0], 1.0)
            .build()
            .unwrap();
        let out = solve(&p, &tol()).unwrap();
        assert!(out.alternative_optima);
        let p = LpBuilder::new(2)
            .minimize(&[1.0, 2.0])
            .ge(&[1.0, 1.0], 1.0)
            .build()
            .unwrap();
        let out = solve(&p, &tol()).unwrap();
        assert!(!out.alternative_optima);
    }
}
