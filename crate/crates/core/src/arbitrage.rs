//! Static arbitrage tests for a market `(P, C, x)`.
//!
//! Three nested conditions are checked, weakest first:
//!
//! 1. law of one price: `P` lies in the column space of `C`, i.e. some real
//!    discount vector `v` has `P = C v`;
//! 2. no strict arbitrage: some `v >= 0` has `P = C v`;
//! 3. no arbitrage: some `v > 0` has `P = C v`.
//!
//! Each test returns the discount vector (as a [`DiscountCurve`]) when the
//! condition holds and a violating [`Portfolio`] when it fails. Portfolios
//! are obtained from the Farkas alternative of the corresponding linear
//! system, so every verdict can be re-checked by direct arithmetic.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::curve::DiscountCurve;
use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{self, LpBuilder, LpProblem, LpStatus};
use crate::market::{Market, Portfolio};
use crate::tolerance::TolerancePolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArbitrageLevel {
    LawOfOnePriceFails,
    StrictArbitrage,
    Arbitrage,
    ArbitrageFree,
}

/// Outcome of the full classification performed by [`check_arbitrage`].
#[derive(Debug, Clone, PartialEq)]
pub struct ArbitrageVerdict {
    pub level: ArbitrageLevel,
    /// Strictly positive for `ArbitrageFree`; for `Arbitrage` a nonnegative
    /// curve that vanishes somewhere.
    pub witness_curve: Option<DiscountCurve>,
    /// Normalized to unit max-norm.
    pub violating_portfolio: Option<Portfolio>,
    /// `rank(C) < N`: the discount vector is not pinned down by the prices.
    pub non_unique: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LawOfOnePrice {
    /// Real-valued (possibly signed) curve with `P = C g(x)`.
    Holds { curve: DiscountCurve },
    /// `qᵀC = 0` and `qᵀP > 0`.
    Fails { portfolio: Portfolio },
}

#[derive(Debug, Clone, PartialEq)]
pub enum StrictArbitrageCheck {
    /// No strict arbitrage: nonnegative curve with `P = C g(x)`.
    NonNegativeCurve { curve: DiscountCurve },
    /// `qᵀP < 0` and `qᵀC >= 0`.
    StrictArbitrage { portfolio: Portfolio },
}

impl LawOfOnePrice {
    pub fn holds(&self) -> bool {
        matches!(self, LawOfOnePrice::Holds { .. })
    }
}

/// Ratio `‖P‖∞ / ‖C‖∞` used to bring discount factors to unit magnitude.
fn discount_scale(market: &Market) -> f64 {
    let (p, c) = (market.price_scale(), market.cashflow_scale());
    if p > 0.0 && c > 0.0 {
        p / c
    } else {
        1.0
    }
}

/// Test whether `P` lies in the column space of `C` by least squares.
///
/// The least-squares residual `r = P − C v` is orthogonal to the columns of
/// `C`, so when it is not negligible it is itself a portfolio with zero cash
/// flows and price `‖r‖² > 0`.
pub fn check_law_of_one_price(market: &Market, tol: &TolerancePolicy) -> Result<LawOfOnePrice> {
    tol.validate()?;
    let ls = linalg::least_squares(market.cashflows(), market.prices(), tol.rank_tol)?;
    if ls.residual.amax() > tol.feas_tol * market.price_scale() {
        return Ok(LawOfOnePrice::Fails {
            portfolio: Portfolio(ls.residual).normalized(),
        });
    }
    let curve = DiscountCurve::from_discount_vector(market.grid(), ls.solution.as_slice(), 0.0)?;
    Ok(LawOfOnePrice::Holds { curve })
}

/// Feasibility of `{C v = P, v >= 0}`.
pub fn strict_arbitrage_problem(market: &Market) -> LpProblem {
    let (m, n) = (market.n_instruments(), market.n_dates());
    let mut b = LpBuilder::new(n);
    let c = market.cashflows();
    for i in 0..m {
        let row: Vec<f64> = c.row(i).iter().copied().collect();
        b = b.eq(&row, market.prices()[i]);
    }
    b.build().expect("market data is finite")
}

/// `max t  s.t.  Ĉ v = P̂,  v >= t·1,  0 <= t <= 1` over `[v; t]`, with
/// `Ĉ`, `P̂` the max-norm normalized data.
pub fn max_min_discount_problem(market: &Market) -> LpProblem {
    let (m, n) = (market.n_instruments(), market.n_dates());
    let cs = market.cashflow_scale();
    let ps = market.price_scale();
    let cs = if cs > 0.0 { cs } else { 1.0 };
    let ps = if ps > 0.0 { ps } else { 1.0 };
    let mut obj = vec![0.0; n + 1];
    obj[n] = -1.0;
    let mut b = LpBuilder::new(n + 1).minimize(&obj);
    for i in 0..m {
        let mut row: Vec<f64> = market.cashflows().row(i).iter().map(|x| x / cs).collect();
        row.push(0.0);
        b = b.eq(&row, market.prices()[i] / ps);
    }
    for j in 0..n {
        let mut row = vec![0.0; n + 1];
        row[j] = 1.0;
        row[n] = -1.0;
        b = b.ge(&row, 0.0);
    }
    let mut cap = vec![0.0; n + 1];
    cap[n] = 1.0;
    b.le(&cap, 1.0).build().expect("market data is finite")
}

/// `min P̂ᵀq  s.t.  Ĉᵀq >= 0,  1ᵀĈᵀq = 1`, `q` free.
///
/// Its dual is `max { t : Ĉ v = P̂, v >= t·1 }`, so the optimal price equals
/// the largest achievable minimum discount factor.
pub fn arbitrage_portfolio_problem(market: &Market) -> LpProblem {
    let (m, n) = (market.n_instruments(), market.n_dates());
    let cs = market.cashflow_scale();
    let ps = market.price_scale();
    let cs = if cs > 0.0 { cs } else { 1.0 };
    let ps = if ps > 0.0 { ps } else { 1.0 };
    let c = market.cashflows() / cs;
    let obj: Vec<f64> = market.prices().iter().map(|p| p / ps).collect();
    let mut b = LpBuilder::new(m).minimize(&obj).free_range(0..m);
    let sums: Vec<f64> = (0..m).map(|i| c.row(i).sum()).collect();
    b = b.eq(&sums, 1.0);
    for j in 0..n {
        let col: Vec<f64> = c.column(j).iter().copied().collect();
        b = b.ge(&col, 0.0);
    }
    b.build().expect("market data is finite")
}

/// Every linear program [`check_arbitrage`] may solve for `market`, by name.
pub fn verdict_problems(market: &Market) -> Vec<(String, LpProblem)> {
    vec![
        ("strict_arbitrage".into(), strict_arbitrage_problem(market)),
        ("max_min_discount".into(), max_min_discount_problem(market)),
        (
            "arbitrage_portfolio".into(),
            arbitrage_portfolio_problem(market),
        ),
    ]
}

/// Search for a nonnegative discount vector; its Farkas alternative is a
/// strict arbitrage.
pub fn check_strict_arbitrage(
    market: &Market,
    tol: &TolerancePolicy,
) -> Result<StrictArbitrageCheck> {
    let problem = strict_arbitrage_problem(market);
    let out = lp::solve(&problem, tol)?;
    match out.status {
        LpStatus::Optimal => {
            let v = out.primal.expect("optimal outcome carries a primal point");
            let curve = DiscountCurve::from_discount_vector(market.grid(), v.as_slice(), 0.0)?;
            Ok(StrictArbitrageCheck::NonNegativeCurve { curve })
        }
        LpStatus::Infeasible => {
            let y = out
                .farkas
                .expect("infeasible outcome carries a certificate");
            Ok(StrictArbitrageCheck::StrictArbitrage {
                portfolio: Portfolio(-y).normalized(),
            })
        }
        LpStatus::Unbounded => Err(Error::Numerical(
            "feasibility problem reported unbounded".into(),
        )),
    }
}

/// Largest attainable minimum discount factor `t*` (in market units) and
/// the discount vector attaining it, or `None` when no `v >= 0` prices the
/// market. `t*` is capped at `‖P‖∞ / ‖C‖∞`.
pub fn max_min_discount(
    market: &Market,
    tol: &TolerancePolicy,
) -> Result<Option<(f64, DVector<f64>)>> {
    let n = market.n_dates();
    let out = lp::solve(&max_min_discount_problem(market), tol)?;
    match out.status {
        LpStatus::Optimal => {
            let w = out.primal.expect("optimal outcome carries a primal point");
            let s = discount_scale(market);
            let v = w.rows(0, n) * s;
            Ok(Some((w[n] * s, v)))
        }
        LpStatus::Infeasible => Ok(None),
        LpStatus::Unbounded => Err(Error::Numerical(
            "bounded problem reported unbounded".into(),
        )),
    }
}

/// Full classification: law of one price, then strict arbitrage, then
/// arbitrage. The weakest failing condition is reported.
pub fn check_arbitrage(market: &Market, tol: &TolerancePolicy) -> Result<ArbitrageVerdict> {
    tol.validate()?;
    let non_unique = linalg::rank(market.cashflows(), tol.rank_tol) < market.n_dates();

    if let LawOfOnePrice::Fails { portfolio } = check_law_of_one_price(market, tol)? {
        return Ok(ArbitrageVerdict {
            level: ArbitrageLevel::LawOfOnePriceFails,
            witness_curve: None,
            violating_portfolio: Some(portfolio),
            non_unique,
        });
    }

    let nonneg_curve = match check_strict_arbitrage(market, tol)? {
        StrictArbitrageCheck::StrictArbitrage { portfolio } => {
            return Ok(ArbitrageVerdict {
                level: ArbitrageLevel::StrictArbitrage,
                witness_curve: None,
                violating_portfolio: Some(portfolio),
                non_unique,
            });
        }
        StrictArbitrageCheck::NonNegativeCurve { curve } => curve,
    };

    if let Some((t, v)) = max_min_discount(market, tol)? {
        if t > tol.strict_tol * discount_scale(market) {
            let curve = DiscountCurve::from_discount_vector(market.grid(), v.as_slice(), 0.0)?;
            return Ok(ArbitrageVerdict {
                level: ArbitrageLevel::ArbitrageFree,
                witness_curve: Some(curve),
                violating_portfolio: None,
                non_unique,
            });
        }
    }

    let out = lp::solve(&arbitrage_portfolio_problem(market), tol)?;
    match out.status {
        LpStatus::Optimal => {
            let q =
                Portfolio(out.primal.expect("optimal outcome carries a primal point")).normalized();
            let price = market.portfolio_price(&q)?;
            let level = if price < -tol.strict_tol * market.price_scale() {
                ArbitrageLevel::StrictArbitrage
            } else {
                ArbitrageLevel::Arbitrage
            };
            Ok(ArbitrageVerdict {
                level,
                witness_curve: Some(nonneg_curve),
                violating_portfolio: Some(q),
                non_unique,
            })
        }
        status => Err(Error::Numerical(format!(
            "no positive discount vector found, but the arbitrage search is {status:?}"
        ))),
    }
}

impl ArbitrageVerdict {
    /// Re-check every attached artifact against its defining inequalities.
    /// Returns a description of the first violation.
    pub fn recheck(
        &self,
        market: &Market,
        tol: &TolerancePolicy,
    ) -> std::result::Result<(), String> {
        let p_scale = market.price_scale().max(1.0);
        let feas = tol.feas_tol * p_scale;
        if let Some(q) = &self.violating_portfolio {
            if (q.0.amax() - 1.0).abs() > 1e-12 {
                return Err(format!("portfolio not normalized: {}", q.0.amax()));
            }
        }
        let curve_residual = |curve: &DiscountCurve| -> f64 {
            (market.prices() - market.cashflows() * curve.on_grid(market.grid())).amax()
        };
        match self.level {
            ArbitrageLevel::ArbitrageFree => {
                let curve = self.witness_curve.as_ref().ok_or("missing witness curve")?;
                if !curve.is_strictly_positive() {
                    return Err("witness curve is not strictly positive".into());
                }
                let r = curve_residual(curve);
                if r > feas {
                    return Err(format!("witness curve misprices by {r}"));
                }
                if self.violating_portfolio.is_some() {
                    return Err("arbitrage-free verdict carries a portfolio".into());
                }
            }
            ArbitrageLevel::Arbitrage | ArbitrageLevel::StrictArbitrage => {
                let q = self
                    .violating_portfolio
                    .as_ref()
                    .ok_or("missing portfolio")?;
                let price = market.portfolio_price(q).map_err(|e| e.to_string())?;
                let flows = market.portfolio_cashflows(q).map_err(|e| e.to_string())?;
                let flow_tol = tol.feas_tol * market.cashflow_scale().max(1.0);
                if flows.iter().any(|&f| f < -flow_tol) {
                    return Err(format!("portfolio has negative cash flows {flows:?}"));
                }
                if self.level == ArbitrageLevel::StrictArbitrage {
                    if price >= -tol.strict_tol * market.price_scale() {
                        return Err(format!("strict arbitrage has price {price}"));
                    }
                } else {
                    if price > feas {
                        return Err(format!("arbitrage has price {price}"));
                    }
                    if flows.max() <= tol.strict_tol {
                        return Err("arbitrage has no strictly positive cash flow".into());
                    }
                    if let Some(curve) = &self.witness_curve {
                        if !curve.is_nonnegative() || curve_residual(curve) > feas {
                            return Err("attached nonnegative curve is invalid".into());
                        }
                    }
                }
            }
            ArbitrageLevel::LawOfOnePriceFails => {
                let q = self
                    .violating_portfolio
                    .as_ref()
                    .ok_or("missing portfolio")?;
                let price = market.portfolio_price(q).map_err(|e| e.to_string())?;
                let flows = market.portfolio_cashflows(q).map_err(|e| e.to_string())?;
                if flows.amax() > tol.feas_tol * market.cashflow_scale().max(1.0) {
                    return Err(format!("portfolio has nonzero cash flows {flows:?}"));
                }
                if price.abs() <= feas {
                    return Err("portfolio has zero price".into());
                }
            }
        }
        Ok(())
    }
}
