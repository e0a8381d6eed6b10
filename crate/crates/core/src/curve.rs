//! Piecewise-linear discount curves anchored at `g(0) = 1` with exponential
//! extrapolation beyond the last knot.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::DateGrid;

/// Discount curve `g: [0, ∞) → ℝ`.
///
/// On `[0, x_N]` the curve linearly interpolates its knots; past the last
/// knot it decays as `g(t) = exp(−y∞·(t − x_N))·g(x_N)`. Knot values may be
/// of any sign: a curve fitted under the law of one price alone need not be
/// positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveRepr", into = "CurveRepr")]
pub struct DiscountCurve {
    knot_times: Vec<f64>,
    knot_values: Vec<f64>,
    long_end_yield: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveRepr {
    knot_times: Vec<f64>,
    knot_values: Vec<f64>,
    #[serde(default)]
    long_end_yield: f64,
}

impl TryFrom<CurveRepr> for DiscountCurve {
    type Error = Error;

    fn try_from(r: CurveRepr) -> Result<Self> {
        Self::new(r.knot_times, r.knot_values, r.long_end_yield)
    }
}

impl From<DiscountCurve> for CurveRepr {
    fn from(c: DiscountCurve) -> Self {
        CurveRepr {
            knot_times: c.knot_times,
            knot_values: c.knot_values,
            long_end_yield: c.long_end_yield,
        }
    }
}

impl DiscountCurve {
    /// Build a curve from explicit knots. The first knot must be `(0, 1)`.
    pub fn new(knot_times: Vec<f64>, knot_values: Vec<f64>, long_end_yield: f64) -> Result<Self> {
        if knot_times.len() != knot_values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} knot times, {} knot values",
                knot_times.len(),
                knot_values.len()
            )));
        }
        if knot_times.len() < 2 {
            return Err(Error::Domain(
                "a curve needs the anchor knot and at least one more".into(),
            ));
        }
        if knot_times[0] != 0.0 || knot_values[0] != 1.0 {
            return Err(Error::Domain("first knot must be (0, 1)".into()));
        }
        if knot_times
            .iter()
            .chain(&knot_values)
            .any(|x| !x.is_finite())
        {
            return Err(Error::NonFinite("curve knots"));
        }
        if knot_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain(
                "knot times must be strictly increasing".into(),
            ));
        }
        if !(long_end_yield.is_finite() && long_end_yield >= 0.0) {
            return Err(Error::Domain(format!(
                "long-end yield must be >= 0, got {long_end_yield}"
            )));
        }
        Ok(Self {
            knot_times,
            knot_values,
            long_end_yield,
        })
    }

    /// Curve through `(0, 1)` and `(x_j, v_j)` for a discount vector `v` on
    /// `grid`.
    pub fn from_discount_vector(grid: &DateGrid, v: &[f64], long_end_yield: f64) -> Result<Self> {
        if v.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "discount vector has {} entries for {} dates",
                v.len(),
                grid.len()
            )));
        }
        let mut times = Vec::with_capacity(v.len() + 1);
        let mut values = Vec::with_capacity(v.len() + 1);
        times.push(0.0);
        values.push(1.0);
        times.extend_from_slice(grid.dates());
        values.extend_from_slice(v);
        Self::new(times, values, long_end_yield)
    }

    pub fn knot_times(&self) -> &[f64] {
        &self.knot_times
    }

    pub fn knot_values(&self) -> &[f64] {
        &self.knot_values
    }

    pub fn long_end_yield(&self) -> f64 {
        self.long_end_yield
    }

    pub fn last_time(&self) -> f64 {
        self.knot_times[self.knot_times.len() - 1]
    }

    /// Evaluate `g(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("curve evaluated at t = {t}")));
        }
        let last = self.knot_times.len() - 1;
        let t_end = self.knot_times[last];
        if t > t_end {
            return Ok((-self.long_end_yield * (t - t_end)).exp() * self.knot_values[last]);
        }
        // first knot with time >= t
        let k = self.knot_times.partition_point(|&x| x < t);
        if self.knot_times[k] == t {
            return Ok(self.knot_values[k]);
        }
        let (t0, t1) = (self.knot_times[k - 1], self.knot_times[k]);
        let (v0, v1) = (self.knot_values[k - 1], self.knot_values[k]);
        Ok(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
    }

    /// `g(x) = [g(x_1), …, g(x_N)]`.
    pub fn on_grid(&self, grid: &DateGrid) -> DVector<f64> {
        DVector::from_iterator(
            grid.len(),
            grid.dates()
                .iter()
                .map(|&x| self.eval(x).expect("grid dates are positive")),
        )
    }

    pub fn is_nonnegative(&self) -> bool {
        self.knot_values.iter().all(|&v| v >= 0.0)
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.knot_values.iter().all(|&v| v > 0.0)
    }

    /// Largest slope magnitude between adjacent knots; a Lipschitz constant
    /// on `[0, x_N]`.
    pub fn max_slope(&self) -> f64 {
        self.knot_times
            .windows(2)
            .zip(self.knot_values.windows(2))
            .map(|(t, v)| ((v[1] - v[0]) / (t[1] - t[0])).abs())
            .fold(0.0, f64::max)
    }
}
