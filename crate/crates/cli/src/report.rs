//! JSON report helpers. Every number is rounded to 12 significant digits.

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};
use staticarb::{DiscountCurve, Market};

pub const SCHEMA: u32 = 1;

pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn num(x: f64) -> Value {
    json!(round12(x))
}

pub fn vector(v: &DVector<f64>) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

pub fn slice(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

pub fn matrix(m: &DMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array(m.row(i).iter().map(|&x| num(x)).collect()))
            .collect(),
    )
}

pub fn curve(c: &DiscountCurve) -> Value {
    json!({
        "knot_times": slice(c.knot_times()),
        "knot_values": slice(c.knot_values()),
        "long_end_yield": num(c.long_end_yield()),
    })
}

/// Header fields shared by every report.
pub fn header(command: &str, market: &Market) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("command".into(), json!(command));
    m.insert("ids".into(), json!(market.ids()));
    m.insert("grid".into(), slice(market.grid().dates()));
    m
}
