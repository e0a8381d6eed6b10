//! Replication and super-replication of liability cash flows.
//!
//! The super-replication set is `Q = { q : qᵀC >= Z }`. Its emptiness is
//! certified by an obstruction `v >= 0` with `C v = 0` and `Z v > 0`; when it
//! is non-empty the least-cost element `argmin { qᵀP : q ∈ Q }` is computed
//! together with its dual, a nonnegative discount vector `v` with `C v = P`
//! and `Z v` equal to the cost.

use nalgebra::{DMatrix, DVector};

use crate::arbitrage::{self, ArbitrageLevel};
use crate::curve::DiscountCurve;
use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{self, LpBuilder, LpProblem, LpStatus};
use crate::market::{LiabilitySchedule, Market, Portfolio};
use crate::tolerance::TolerancePolicy;

/// Either a point of `Q` or an obstruction proving `Q` is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityCertificate {
    pub feasible: bool,
    pub portfolio: Option<Portfolio>,
    /// `v >= 0`, `C v = 0`, `Z v > 0`, unit max-norm.
    pub obstruction: Option<DVector<f64>>,
    /// Instrument whose effective dates match the liabilities, when the
    /// portfolio was built from it directly.
    pub matching_instrument: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperReplicationResult {
    pub portfolio: Portfolio,
    /// `qᵀP`.
    pub cost: f64,
    /// `qᵀC − Z`, nonnegative up to tolerance.
    pub slack: DVector<f64>,
    /// Dual optimum: `v >= 0`, `C v = P`, `Z v = cost`.
    pub dual_discount: DVector<f64>,
    /// Some nonbasic column prices out at zero; other optimal portfolios may
    /// exist.
    pub possibly_non_unique: bool,
    /// `rank(C) < M`, i.e. `ker(Cᵀ) != {0}`.
    pub kernel_nontrivial: bool,
}

/// Portfolio with `qᵀC = Z` exactly (up to tolerance), if one exists.
pub fn replicate_exact(
    market: &Market,
    liab: &LiabilitySchedule,
    tol: &TolerancePolicy,
) -> Result<Option<Portfolio>> {
    liab.ensure_matches(market)?;
    let ct = market.cashflows().transpose();
    let ls = linalg::least_squares(&ct, liab.amounts(), tol.rank_tol)?;
    let limit = tol.feas_tol * liab.amounts().amax();
    Ok((ls.residual.amax() <= limit).then(|| Portfolio(ls.solution)))
}

/// Sufficient condition for feasibility: an instrument `i` with nonnegative
/// cash flows such that `C_ij > 0` exactly when `Z_j != 0`. Returns `i` and
/// the super-replicating position `t·e_i`,
/// `t = max(max_j Z_j, 0) / min_{j: C_ij > 0} C_ij`.
pub fn matching_instrument(
    market: &Market,
    liab: &LiabilitySchedule,
) -> Option<(usize, Portfolio)> {
    let c = market.cashflows();
    let z = liab.amounts();
    let m = market.n_instruments();
    (0..m).find_map(|i| {
        let row = c.row(i);
        let aligned = row.iter().all(|&x| x >= 0.0)
            && row
                .iter()
                .zip(z.iter())
                .all(|(&cij, &zj)| (zj != 0.0) == (cij > 0.0));
        if !aligned {
            return None;
        }
        let top = z.iter().copied().fold(0.0_f64, f64::max);
        let floor = row
            .iter()
            .copied()
            .filter(|&x| x > 0.0)
            .fold(f64::INFINITY, f64::min);
        let t = if floor.is_finite() { top / floor } else { 0.0 };
        let mut q = DVector::zeros(m);
        q[i] = t;
        Some((i, Portfolio(q)))
    })
}

/// `{ q free : Cᵀq >= Z }` with objective `P` (or zero when `priced` is
/// false).
pub fn superreplication_problem(
    market: &Market,
    liab: &LiabilitySchedule,
    priced: bool,
) -> LpProblem {
    let (m, n) = (market.n_instruments(), market.n_dates());
    let obj: Vec<f64> = if priced {
        market.prices().iter().copied().collect()
    } else {
        vec![0.0; m]
    };
    let mut b = LpBuilder::new(m).minimize(&obj).free_range(0..m);
    for j in 0..n {
        let col: Vec<f64> = market.cashflows().column(j).iter().copied().collect();
        b = b.ge(&col, liab.amounts()[j]);
    }
    b.build().expect("market data is finite")
}

/// Decide whether `Q` is non-empty.
pub fn check_feasibility(
    market: &Market,
    liab: &LiabilitySchedule,
    tol: &TolerancePolicy,
) -> Result<FeasibilityCertificate> {
    liab.ensure_matches(market)?;
    if let Some((i, q)) = matching_instrument(market, liab) {
        return Ok(FeasibilityCertificate {
            feasible: true,
            portfolio: Some(q),
            obstruction: None,
            matching_instrument: Some(i),
        });
    }
    let problem = superreplication_problem(market, liab, false);
    match lp::feasible_point(&problem, tol)? {
        Some(q) => Ok(FeasibilityCertificate {
            feasible: true,
            portfolio: Some(Portfolio(q)),
            obstruction: None,
            matching_instrument: None,
        }),
        None => {
            let out = lp::solve(&problem, tol)?;
            let v = out
                .farkas
                .ok_or_else(|| Error::Numerical("infeasible system without certificate".into()))?;
            Ok(FeasibilityCertificate {
                feasible: false,
                portfolio: None,
                obstruction: Some(v.map(|x| x.max(0.0))),
                matching_instrument: None,
            })
        }
    }
}

/// Least-cost super-replicating portfolio.
///
/// Requires an arbitrage-free market; a market with arbitrage is rejected
/// with [`Error::ArbitragePrecluded`]. A nontrivial `ker(Cᵀ)` only produces
/// a warning: the program is attempted and an unbounded outcome is reported
/// as [`Error::UnboundedBelow`].
pub fn superreplicate(
    market: &Market,
    liab: &LiabilitySchedule,
    tol: &TolerancePolicy,
) -> Result<SuperReplicationResult> {
    liab.ensure_matches(market)?;
    let verdict = arbitrage::check_arbitrage(market, tol)?;
    if verdict.level != ArbitrageLevel::ArbitrageFree {
        return Err(Error::ArbitragePrecluded {
            level: verdict.level,
            portfolio: verdict.violating_portfolio.map(|q| q.0.as_slice().to_vec()),
        });
    }
    let kernel_nontrivial = linalg::rank(market.cashflows(), tol.rank_tol) < market.n_instruments();
    if kernel_nontrivial {
        log::warn!(
            "cash-flow matrix has rank below the number of instruments; optimum may not exist"
        );
    }
    let feas = check_feasibility(market, liab, tol)?;
    if !feas.feasible {
        return Err(Error::InfeasibleLiability {
            obstruction: feas
                .obstruction
                .map(|v| v.as_slice().to_vec())
                .unwrap_or_default(),
        });
    }

    let problem = superreplication_problem(market, liab, true);
    let out = lp::solve(&problem, tol)?;
    match out.status {
        LpStatus::Optimal => {
            let q = Portfolio(out.primal.expect("optimal outcome carries a primal point"));
            let cost = market.portfolio_price(&q)?;
            let slack = market.portfolio_cashflows(&q)? - liab.amounts();
            let dual_discount = out.dual_ineq.expect("optimal outcome carries duals");
            Ok(SuperReplicationResult {
                portfolio: q,
                cost,
                slack,
                dual_discount,
                possibly_non_unique: out.alternative_optima,
                kernel_nontrivial,
            })
        }
        LpStatus::Unbounded => Err(Error::UnboundedBelow {
            ray: out.ray.map(|r| r.as_slice().to_vec()).unwrap_or_default(),
        }),
        LpStatus::Infeasible => Err(Error::InfeasibleLiability {
            obstruction: out
                .farkas
                .map(|v| v.as_slice().to_vec())
                .unwrap_or_default(),
        }),
    }
}

/// Windows `(start, end]` between consecutive liability payment dates, as
/// inclusive index ranges `start..=end` with `end` the payment index.
fn windows(liab: &LiabilitySchedule) -> Result<Vec<(usize, usize)>> {
    let pay = liab.payment_indices();
    if pay.is_empty() {
        return Err(Error::ZeroLiability);
    }
    let mut start = 0;
    Ok(pay
        .into_iter()
        .map(|end| {
            let w = (start, end);
            start = end + 1;
            w
        })
        .collect())
}

fn aggregate_with(
    market: &Market,
    liab: &LiabilitySchedule,
    factor: impl Fn(usize, usize) -> f64,
) -> Result<Market> {
    liab.ensure_matches(market)?;
    let c = market.cashflows();
    let mut out = c.clone();
    for (start, end) in windows(liab)? {
        for i in 0..market.n_instruments() {
            let mut acc = 0.0;
            for s in start..=end {
                acc += factor(s, end) * c[(i, s)];
            }
            for s in start..end {
                out[(i, s)] = 0.0;
            }
            out[(i, end)] = acc;
        }
    }
    market.with_cashflows(out)
}

/// Roll intermediate payments forward, undiscounted, onto the next
/// liability payment date. Columns after the last payment date are kept.
pub fn aggregate_buffer(market: &Market, liab: &LiabilitySchedule) -> Result<Market> {
    aggregate_with(market, liab, |_, _| 1.0)
}

/// Roll intermediate payments onto the next liability payment date at the
/// forward factors `g(x_s) / g(x_jk)` of a strictly positive curve, which
/// leaves `C g(x)` unchanged.
pub fn aggregate_forward(
    market: &Market,
    liab: &LiabilitySchedule,
    curve: &DiscountCurve,
) -> Result<Market> {
    let g = curve.on_grid(market.grid());
    for (j, &v) in g.iter().enumerate() {
        if !(v > 0.0) {
            return Err(Error::NonPositiveCurve {
                date: market.grid().dates()[j],
                value: v,
            });
        }
    }
    aggregate_with(market, liab, |s, end| g[s] / g[end])
}

/// `‖Z − qᵀC‖² + λ‖q‖²`.
pub fn quadratic_objective(
    market: &Market,
    liab: &LiabilitySchedule,
    lambda: f64,
    q: &Portfolio,
) -> f64 {
    let resid = liab.amounts() - market.cashflows().tr_mul(&q.0);
    resid.norm_squared() + lambda * q.0.norm_squared()
}

/// Ridge hedge: the unique minimizer of [`quadratic_objective`], solving
/// `(C Cᵀ + λI) q = C Z`.
pub fn hedge_quadratic(
    market: &Market,
    liab: &LiabilitySchedule,
    lambda: f64,
) -> Result<Portfolio> {
    liab.ensure_matches(market)?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Domain(format!(
            "ridge parameter must be positive, got {lambda}"
        )));
    }
    let c = market.cashflows();
    let m = market.n_instruments();
    let normal: DMatrix<f64> = c * c.transpose() + DMatrix::identity(m, m) * lambda;
    let rhs = c * liab.amounts();
    Ok(Portfolio(linalg::solve_spd(normal, &rhs)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn market(dates: Vec<f64>, prices: Vec<f64>, rows: Vec<Vec<f64>>) -> Market {
        Market::from_rows(dates, prices, rows).unwrap()
    }

    fn liab(m: &Market, z: Vec<f64>) -> LiabilitySchedule {
        LiabilitySchedule::for_market(m, z).unwrap()
    }

    fn diag() -> Market {
        market(
            vec![1.0, 2.0],
            vec![0.95, 0.9],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
    }

    #[test]
    fn exact_replication_examples() {
        let m = diag();
        let q = replicate_exact(&m, &liab(&m, vec![3.0, 4.0]), &tol())
            .unwrap()
            .unwrap();
        assert!((q.0[0] - 3.0).abs() < 1e-12 && (q.0[1] - 4.0).abs() < 1e-12);

        let m = market(vec![1.0, 2.0], vec![1.9], vec![vec![1.0, 1.0]]);
        assert!(replicate_exact(&m, &liab(&m, vec![1.0, 2.0]), &tol())
            .unwrap()
            .is_none());

        let m = market(
            vec![1.0, 2.0],
            vec![1.0, 0.05],
            vec![vec![1.0, 0.0], vec![0.05, 1.0]],
        );
        let q = replicate_exact(&m, &liab(&m, vec![0.0, 1.0]), &tol())
            .unwrap()
            .unwrap();
        assert!((q.0[0] + 0.05).abs() < 1e-12 && (q.0[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn feasibility_via_matching_instrument() {
        let m = market(
            vec![1.0, 2.0, 3.0],
            vec![1.0, 1.0],
            vec![vec![0.5, 0.0, 2.0], vec![1.0, 1.0, 1.0]],
        );
        let z = liab(&m, vec![3.0, 0.0, 1.0]);
        let cert = check_feasibility(&m, &z, &tol()).unwrap();
        assert!(cert.feasible);
        assert_eq!(cert.matching_instrument, Some(0));
        // t = 3 / 0.5
        let q = cert.portfolio.unwrap();
        assert!((q.0[0] - 6.0).abs() < 1e-12 && q.0[1] == 0.0);
        let flows = m.portfolio_cashflows(&q).unwrap();
        assert!(flows.iter().zip(z.amounts().iter()).all(|(f, z)| f >= z));
    }

    #[test]
    fn obstruction_for_opposite_flows() {
        let m = market(vec![1.0, 2.0], vec![0.0], vec![vec![1.0, -1.0]]);
        let cert = check_feasibility(&m, &liab(&m, vec![1.0, 1.0]), &tol()).unwrap();
        assert!(!cert.feasible);
        let v = cert.obstruction.unwrap();
        assert!((v[0] - 1.0).abs() < 1e-12 && (v[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_liability_is_feasible_with_zero_portfolio() {
        let m = market(vec![1.0, 2.0], vec![0.0], vec![vec![1.0, -1.0]]);
        let cert = check_feasibility(&m, &liab(&m, vec![0.0, 0.0]), &tol()).unwrap();
        assert!(cert.feasible);
        assert!(cert.portfolio.unwrap().0.amax() < 1e-15);
    }

    #[test]
    fn superreplicate_diagonal() {
        let m = diag();
        let r = superreplicate(&m, &liab(&m, vec![1.0, 1.0]), &tol()).unwrap();
        assert!((r.cost - 1.85).abs() < 1e-12);
        assert!(r.slack.amax() < 1e-12);
        assert!((r.portfolio.0[0] - 1.0).abs() < 1e-12);

        let r = superreplicate(&m, &liab(&m, vec![0.5, 2.0]), &tol()).unwrap();
        assert!((r.cost - 2.275).abs() < 1e-12);
        assert!((r.dual_discount[0] - 0.95).abs() < 1e-12);
        assert!((r.dual_discount[1] - 0.9).abs() < 1e-12);
    }

    #[test]
    fn superreplicate_rejects_arbitrage() {
        let m = market(
            vec![1.0, 2.0],
            vec![1.0, 0.05],
            vec![vec![1.0, 0.0], vec![0.05, 1.0]],
        );
        let err = superreplicate(&m, &liab(&m, vec![0.0, 1.0]), &tol()).unwrap_err();
        assert!(matches!(
            err,
            Error::ArbitragePrecluded {
                level: ArbitrageLevel::Arbitrage,
                ..
            }
        ));
    }

    #[test]
    fn superreplicate_reports_infeasibility() {
        // arbitrage-free (g = [1, 1] prices it at 0) yet Z cannot be dominated
        let m = market(vec![1.0, 2.0], vec![0.0], vec![vec![1.0, -1.0]]);
        let err = superreplicate(&m, &liab(&m, vec![1.0, 1.0]), &tol()).unwrap_err();
        match err {
            Error::InfeasibleLiability { obstruction } => assert_eq!(obstruction.len(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn buffer_aggregation_examples() {
        let m = market(vec![1.0, 2.0, 3.0], vec![2.0], vec![vec![1.0, 1.0, 1.0]]);
        let a = aggregate_buffer(&m, &liab(&m, vec![0.0, 0.0, 5.0])).unwrap();
        assert_eq!(a.cashflows().as_slice(), &[0.0, 0.0, 3.0]);

        let m = market(
            vec![1.0, 2.0, 3.0, 4.0],
            vec![2.0],
            vec![vec![1.0, 0.0, 2.0, 0.0]],
        );
        let a = aggregate_buffer(&m, &liab(&m, vec![0.0, 3.0, 0.0, 4.0])).unwrap();
        assert_eq!(a.cashflows().as_slice(), &[0.0, 1.0, 0.0, 2.0]);

        let m = diag();
        let a = aggregate_buffer(&m, &liab(&m, vec![1.0, -1.0])).unwrap();
        assert_eq!(a.cashflows(), m.cashflows());

        assert!(matches!(
            aggregate_buffer(&m, &liab(&m, vec![0.0, 0.0])),
            Err(Error::ZeroLiability)
        ));
    }

    #[test]
    fn trailing_columns_are_kept() {
        let m = market(vec![1.0, 2.0, 3.0], vec![2.0], vec![vec![1.0, 2.0, 4.0]]);
        let a = aggregate_buffer(&m, &liab(&m, vec![0.0, 1.0, 0.0])).unwrap();
        assert_eq!(a.cashflows().as_slice(), &[0.0, 3.0, 4.0]);
    }

    #[test]
    fn forward_aggregation_examples() {
        let m = market(vec![1.0, 2.0], vec![1.855], vec![vec![1.0, 1.0]]);
        let z = liab(&m, vec![0.0, 1.0]);
        let g = DiscountCurve::from_discount_vector(m.grid(), &[0.95, 0.9], 0.0).unwrap();
        let a = aggregate_forward(&m, &z, &g).unwrap();
        assert_eq!(a.cashflows()[(0, 0)], 0.0);
        assert!((a.cashflows()[(0, 1)] - (0.95 / 0.9 + 1.0)).abs() < 1e-15);

        let flat = DiscountCurve::from_discount_vector(m.grid(), &[1.0, 1.0], 0.0).unwrap();
        assert_eq!(
            aggregate_forward(&m, &z, &flat).unwrap(),
            aggregate_buffer(&m, &z).unwrap()
        );

        let m = diag();
        let z = liab(&m, vec![1.0, 1.0]);
        assert_eq!(
            aggregate_forward(&m, &z, &g).unwrap().cashflows(),
            m.cashflows()
        );

        let bad = DiscountCurve::from_discount_vector(m.grid(), &[0.9, 0.0], 0.0).unwrap();
        assert!(matches!(
            aggregate_forward(&m, &z, &bad),
            Err(Error::NonPositiveCurve { .. })
        ));
    }

    #[test]
    fn quadratic_hedge_examples() {
        let m = market(vec![1.0], vec![1.0], vec![vec![1.0]]);
        let q = hedge_quadratic(&m, &liab(&m, vec![1.0]), 1.0).unwrap();
        assert!((q.0[0] - 0.5).abs() < 1e-15);

        let m = diag();
        let q = hedge_quadratic(&m, &liab(&m, vec![2.0, 4.0]), 1e-10).unwrap();
        assert!((q.0[0] - 2.0).abs() < 1e-6 && (q.0[1] - 4.0).abs() < 1e-6);

        assert!(matches!(
            hedge_quadratic(&m, &liab(&m, vec![2.0, 4.0]), 0.0),
            Err(Error::Domain(_))
        ));
        assert!(hedge_quadratic(&m, &liab(&m, vec![2.0, 4.0]), -1.0).is_err());
    }

    #[test]
    fn quadratic_hedge_two_bond_against_hand_inverse() {
        // C = [[1,0],[c,1]], Z = [0,1], λ = 0.01:
        // C Cᵀ + λI = [[1+λ, c], [c, c²+1+λ]], C Z = [0, 1]
        let c = 0.05;
        let lam = 0.01;
        let m = market(
            vec![1.0, 2.0],
            vec![1.0, c],
            vec![vec![1.0, 0.0], vec![c, 1.0]],
        );
        let q = hedge_quadratic(&m, &liab(&m, vec![0.0, 1.0]), lam).unwrap();
        let (a, b, d) = (1.0 + lam, c, c * c + 1.0 + lam);
        let det = a * d - b * b;
        let expected = [-b / det, a / det];
        assert!((q.0[0] - expected[0]).abs() < 1e-14);
        assert!((q.0[1] - expected[1]).abs() < 1e-14);
    }
}
