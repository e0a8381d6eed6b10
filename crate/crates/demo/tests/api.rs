use serde_json::Value;
use staticarb_demo::{check_market, super_replicate, two_bond};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn two_bond_levels_follow_the_price() {
    // priced at the coupon: g = [1, 0], an arbitrage but not a strict one
    let r = parse(two_bond(0.05, 0.05));
    assert_eq!(r["level"], "Arbitrage");
    let q: Vec<f64> = serde_json::from_value(r["portfolio"].clone()).unwrap();
    assert!((q[0] + 0.05).abs() < 1e-12 && (q[1] - 1.0).abs() < 1e-12);
    assert_eq!(r["nonnegative_curve"].as_array().unwrap().len(), 121);

    let r = parse(two_bond(0.05, 0.95));
    assert_eq!(r["level"], "ArbitrageFree");
    let knots: Vec<f64> = serde_json::from_value(r["knots"]["values"].clone()).unwrap();
    assert!((knots[2] - 0.9).abs() < 1e-12);

    let r = parse(two_bond(0.05, 0.01));
    assert_eq!(r["level"], "StrictArbitrage");
    assert!(r.get("nonnegative_curve").is_none());
}

#[test]
fn check_market_from_csv() {
    let r = parse(check_market(
        "id,price\nZ,0.95\n",
        "id,date,amount\nZ,1,1\n",
    ));
    assert_eq!(r["level"], "ArbitrageFree");
    let curve = r["curve"].as_array().unwrap();
    assert_eq!(curve[0][1].as_f64().unwrap(), 1.0);

    let r = parse(check_market(
        "id,price\nZ,0.95\n",
        "id,date,amount\nQ,1,1\n",
    ));
    assert!(r["error"]
        .as_str()
        .unwrap()
        .contains("unknown instrument id"));
}

#[test]
fn super_replication_from_csv() {
    let r = parse(super_replicate(
        "id,price\nA,0.95\nB,0.9\n",
        "id,date,amount\nA,1,1\nB,2,1\n",
        "date,amount\n1,0.5\n2,2\n",
    ));
    assert!((r["cost"].as_f64().unwrap() - 2.275).abs() < 1e-12);

    let r = parse(super_replicate(
        "id,price\nA,0\n",
        "id,date,amount\nA,1,1\nA,2,-1\n",
        "date,amount\n1,1\n2,1\n",
    ));
    assert!(r["error"].as_str().unwrap().contains("infeasible"));
}
