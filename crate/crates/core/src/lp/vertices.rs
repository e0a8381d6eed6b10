//! Brute-force vertex and extreme-ray enumeration, used as an independent
//! oracle for the simplex kernel on small problems.

use nalgebra::{DMatrix, DVector};

use super::problem::LpProblem;
use crate::error::{Error, Result};

pub const MAX_ENUMERATION_VARS: usize = 12;

const FEAS_TOL: f64 = 1e-9;
const DEDUP_TOL: f64 = 1e-7;

/// Gauss-Jordan elimination in place with partial pivoting on the first
/// `cols` columns. Returns the pivot column of each pivot row.
fn rref(m: &mut DMatrix<f64>, cols: usize) -> Vec<usize> {
    let scale = m.amax().max(1.0);
    let tol = 1e-10 * scale;
    let rows = m.nrows();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, val) = (r..rows)
            .map(|i| (i, m[(i, c)].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= tol {
            continue;
        }
        m.swap_rows(r, best);
        let piv = m[(r, c)];
        for j in 0..m.ncols() {
            m[(r, j)] /= piv;
        }
        for i in 0..rows {
            if i != r {
                let f = m[(i, c)];
                if f != 0.0 {
                    for j in 0..m.ncols() {
                        let v = m[(r, j)];
                        m[(i, j)] -= f * v;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Constraint rows `(a, rhs)` read as `aᵀw = rhs` when active.
struct Rows {
    eq: Vec<(Vec<f64>, f64)>,
    ineq: Vec<(Vec<f64>, f64)>,
}

fn collect_rows(p: &LpProblem, homogeneous: bool) -> Rows {
    let n = p.n_vars();
    let rhs = |v: f64| if homogeneous { 0.0 } else { v };
    let eq_all: Vec<(Vec<f64>, f64)> = (0..p.n_eq())
        .map(|i| (p.eq_lhs.row(i).iter().copied().collect(), rhs(p.eq_rhs[i])))
        .collect();
    // keep a maximal linearly independent subset of the equalities
    let mut eq: Vec<(Vec<f64>, f64)> = Vec::new();
    for row in eq_all {
        let mut trial = DMatrix::zeros(eq.len() + 1, n);
        for (i, (a, _)) in eq.iter().chain(std::iter::once(&row)).enumerate() {
            for j in 0..n {
                trial[(i, j)] = a[j];
            }
        }
        if rref(&mut trial, n).len() == eq.len() + 1 {
            eq.push(row);
        }
    }
    let mut ineq: Vec<(Vec<f64>, f64)> = (0..p.n_ineq())
        .map(|i| {
            (
                p.ineq_lhs.row(i).iter().copied().collect(),
                rhs(p.ineq_rhs[i]),
            )
        })
        .collect();
    for j in (0..n).filter(|&j| !p.is_free(j)) {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        ineq.push((e, 0.0));
    }
    Rows { eq, ineq }
}

/// Visit every `k`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn push_unique(list: &mut Vec<DVector<f64>>, v: DVector<f64>) {
    if !list.iter().any(|u| (u - &v).amax() <= DEDUP_TOL) {
        list.push(v);
    }
}

fn guard(p: &LpProblem) -> Result<()> {
    p.validate()?;
    if p.n_vars() > MAX_ENUMERATION_VARS {
        return Err(Error::TooManyVariables {
            max: MAX_ENUMERATION_VARS,
            got: p.n_vars(),
        });
    }
    Ok(())
}

/// All basic feasible solutions of the feasible region of `p`.
///
/// A region containing a line (possible only with free variables) has no
/// vertices and yields an empty list.
pub fn enumerate_vertices(p: &LpProblem) -> Result<Vec<DVector<f64>>> {
    guard(p)?;
    let n = p.n_vars();
    let rows = collect_rows(p, false);
    let mut out = Vec::new();
    if rows.eq.len() > n {
        return Ok(out);
    }
    let need = n - rows.eq.len();
    let tol = FEAS_TOL * p.data_scale();
    for_each_subset(rows.ineq.len(), need, |subset| {
        let mut m = DMatrix::zeros(n, n + 1);
        for (i, (a, b)) in rows
            .eq
            .iter()
            .chain(subset.iter().map(|&s| &rows.ineq[s]))
            .enumerate()
        {
            for j in 0..n {
                m[(i, j)] = a[j];
            }
            m[(i, n)] = *b;
        }
        if rref(&mut m, n).len() < n {
            return;
        }
        let w = m.column(n).into_owned();
        if p.max_violation(&w) <= tol {
            push_unique(&mut out, w);
        }
    });
    if n == 0 {
        out.clear();
    }
    Ok(out)
}

/// Extreme rays of the recession cone `{A d = 0, G d >= 0, d_j >= 0}`,
/// normalized to unit max-norm.
pub fn enumerate_extreme_rays(p: &LpProblem) -> Result<Vec<DVector<f64>>> {
    guard(p)?;
    let n = p.n_vars();
    let rows = collect_rows(p, true);
    let mut out = Vec::new();
    if n == 0 || rows.eq.len() > n - 1 {
        return Ok(out);
    }
    let need = n - 1 - rows.eq.len();
    let in_cone = |d: &DVector<f64>| {
        rows.eq.iter().all(|(a, _)| dot(a, d).abs() <= FEAS_TOL)
            && rows.ineq.iter().all(|(a, _)| dot(a, d) >= -FEAS_TOL)
    };
    for_each_subset(rows.ineq.len(), need, |subset| {
        let mut m = DMatrix::zeros(n - 1, n);
        for (i, (a, _)) in rows
            .eq
            .iter()
            .chain(subset.iter().map(|&s| &rows.ineq[s]))
            .enumerate()
        {
            for j in 0..n {
                m[(i, j)] = a[j];
            }
        }
        let pivots = rref(&mut m, n);
        if pivots.len() < n - 1 {
            return;
        }
        let free = (0..n)
            .find(|c| !pivots.contains(c))
            .expect("one free column");
        let mut d = DVector::zeros(n);
        d[free] = 1.0;
        for (r, &c) in pivots.iter().enumerate() {
            d[c] = -m[(r, free)];
        }
        d /= d.amax();
        for cand in [d.clone(), -d] {
            if in_cone(&cand) {
                push_unique(&mut out, cand);
            }
        }
    });
    Ok(out)
}

fn dot(a: &[f64], d: &DVector<f64>) -> f64 {
    a.iter().zip(d.iter()).map(|(x, y)| x * y).sum()
}
