//! Browser demo: a thin WebAssembly layer over `staticarb`.
//!
//! Every operation is a plain Rust function returning a JSON string, so it
//! can be tested natively; the `#[wasm_bindgen]` exports only forward.
//! Failures are reported as `{"error": "..."}`.

use serde_json::{json, Value};
use staticarb::arbitrage::{check_strict_arbitrage, StrictArbitrageCheck};
use staticarb::io::{assemble, parse_cashflows, parse_instruments, parse_liabilities};
use staticarb::replication::superreplicate;
use staticarb::{check_arbitrage, DiscountCurve, Market, TolerancePolicy};
use wasm_bindgen::prelude::wasm_bindgen;

const SAMPLES: usize = 121;

fn error(e: impl std::fmt::Display) -> String {
    json!({ "error": e.to_string() }).to_string()
}

/// `(t, g(t))` on `[0, 1.25·x_N]`.
fn samples(curve: &DiscountCurve) -> Value {
    let end = curve.last_time() * 1.25;
    let pts: Vec<Value> = (0..SAMPLES)
        .map(|k| {
            let t = end * k as f64 / (SAMPLES - 1) as f64;
            json!([t, curve.eval(t).unwrap_or(f64::NAN)])
        })
        .collect();
    Value::Array(pts)
}

fn verdict_json(market: &Market) -> staticarb::Result<Value> {
    let tol = TolerancePolicy::default();
    let v = check_arbitrage(market, &tol)?;
    let mut out = json!({
        "level": v.level,
        "non_unique": v.non_unique,
        "grid": market.grid().dates(),
        "ids": market.ids(),
    });
    if let Some(c) = &v.witness_curve {
        out["knots"] = json!({ "times": c.knot_times(), "values": c.knot_values() });
        out["curve"] = samples(c);
    }
    if let Some(q) = &v.violating_portfolio {
        out["portfolio"] = json!(q.positions());
        out["portfolio_price"] = json!(market.portfolio_price(q)?);
        out["portfolio_cashflows"] = json!(market.portfolio_cashflows(q)?.as_slice());
    }
    Ok(out)
}

/// Two-instrument market `P = [1, price]`, `C = [[1, 0], [coupon, 1]]`:
/// a one-year zero and a two-year bond paying `coupon` at year one.
pub fn two_bond(coupon: f64, price: f64) -> String {
    let run = || -> staticarb::Result<Value> {
        let market = Market::from_rows(
            vec![1.0, 2.0],
            vec![1.0, price],
            vec![vec![1.0, 0.0], vec![coupon, 1.0]],
        )?;
        let mut out = verdict_json(&market)?;
        if let StrictArbitrageCheck::NonNegativeCurve { curve } =
            check_strict_arbitrage(&market, &TolerancePolicy::default())?
        {
            out["nonnegative_curve"] = samples(&curve);
        }
        Ok(out)
    };
    run().map(|v| v.to_string()).unwrap_or_else(error)
}

fn parse_market(
    instruments: &str,
    cashflows: &str,
    liabilities: Option<&str>,
) -> staticarb::Result<(Market, Option<staticarb::LiabilitySchedule>)> {
    let inst = parse_instruments(instruments.as_bytes(), "instruments")?;
    let cf = parse_cashflows(cashflows.as_bytes(), "cashflows")?;
    let liab = liabilities
        .map(|text| parse_liabilities(text.as_bytes(), "liabilities"))
        .transpose()?;
    assemble(&inst, "cashflows", &cf, liab.as_deref())
}

/// Classify a market given as CSV text (`id,price` and `id,date,amount`).
pub fn check_market(instruments: &str, cashflows: &str) -> String {
    parse_market(instruments, cashflows, None)
        .and_then(|(m, _)| verdict_json(&m))
        .map(|v| v.to_string())
        .unwrap_or_else(error)
}

/// Least-cost super-replication of a `date,amount` liability schedule.
pub fn super_replicate(instruments: &str, cashflows: &str, liabilities: &str) -> String {
    let run = || -> staticarb::Result<Value> {
        let (market, liab) = parse_market(instruments, cashflows, Some(liabilities))?;
        let liab = liab.expect("liabilities supplied");
        let res = superreplicate(&market, &liab, &TolerancePolicy::default())?;
        let flows = market.portfolio_cashflows(&res.portfolio)?;
        Ok(json!({
            "ids": market.ids(),
            "grid": market.grid().dates(),
            "portfolio": res.portfolio.positions(),
            "cost": res.cost,
            "liabilities": liab.amounts().as_slice(),
            "portfolio_cashflows": flows.as_slice(),
            "dual_discount": res.dual_discount.as_slice(),
            "possibly_non_unique": res.possibly_non_unique,
        }))
    };
    run().map(|v| v.to_string()).unwrap_or_else(error)
}

#[wasm_bindgen(js_name = twoBond)]
pub fn two_bond_js(coupon: f64, price: f64) -> String {
    two_bond(coupon, price)
}

#[wasm_bindgen(js_name = checkMarket)]
pub fn check_market_js(instruments: &str, cashflows: &str) -> String {
    check_market(instruments, cashflows)
}

#[wasm_bindgen(js_name = superReplicate)]
pub fn super_replicate_js(instruments: &str, cashflows: &str, liabilities: &str) -> String {
    super_replicate(instruments, cashflows, liabilities)
}
