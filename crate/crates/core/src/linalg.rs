//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Minimum-norm least-squares solution of `A x ≈ b`.
pub struct LeastSquares {
    pub solution: DVector<f64>,
    /// `b − A x`; orthogonal to the column space of `A`.
    pub residual: DVector<f64>,
    pub rank: usize,
}

fn cutoff(singular_values: &DVector<f64>, rank_tol: f64) -> f64 {
    rank_tol * singular_values.max()
}

/// Numerical rank with singular values below `rank_tol × σ_max` treated as
/// zero.
pub fn rank(a: &DMatrix<f64>, rank_tol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = a.clone().singular_values();
    let cut = cutoff(&sv, rank_tol);
    sv.iter().filter(|&&s| s > cut && s > 0.0).count()
}

pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>, rank_tol: f64) -> Result<LeastSquares> {
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "least squares with {} rows and rhs of length {}",
            a.nrows(),
            b.len()
        )));
    }
    if a.amax() == 0.0 {
        return Ok(LeastSquares {
            solution: DVector::zeros(a.ncols()),
            residual: b.clone(),
            rank: 0,
        });
    }
    let svd = a.clone().svd(true, true);
    let cut = cutoff(&svd.singular_values, rank_tol);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > cut && s > 0.0)
        .count();
    let solution = svd
        .solve(b, cut.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let residual = b - a * &solution;
    Ok(LeastSquares {
        solution,
        residual,
        rank,
    })
}

/// Solve a symmetric positive-definite system by Cholesky factorization.
pub fn solve_spd(a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::Numerical("matrix is not positive definite".into()))?;
    Ok(chol.solve(b))
}

/// Solve a square system by LU factorization with partial pivoting.
pub fn solve_square(a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    a.lu()
        .solve(b)
        .ok_or_else(|| Error::Numerical("singular matrix".into()))
}
