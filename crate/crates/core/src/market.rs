//! Markets, portfolios and liability schedules on a common date grid.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance, in years, used when matching externally supplied dates
/// against a grid.
pub const DATE_MATCH_TOL: f64 = 1e-9;

/// Strictly increasing, strictly positive cash-flow dates `x_1 < … < x_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DateGrid(Vec<f64>);

impl DateGrid {
    pub fn new(dates: Vec<f64>) -> Result<Self> {
        if dates.is_empty() {
            return Err(Error::InvalidGrid(
                "grid must contain at least one date".into(),
            ));
        }
        for (j, &x) in dates.iter().enumerate() {
            if !x.is_finite() || x <= 0.0 {
                return Err(Error::InvalidGrid(format!(
                    "date #{} = {x} is not a positive time",
                    j + 1
                )));
            }
            if j > 0 && x <= dates[j - 1] {
                return Err(Error::InvalidGrid(format!(
                    "dates must be strictly increasing ({} then {x})",
                    dates[j - 1]
                )));
            }
        }
        Ok(Self(dates))
    }

    pub fn dates(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    /// Index of `date` on the grid, matched within [`DATE_MATCH_TOL`].
    pub fn position(&self, date: f64) -> Option<usize> {
        let idx = self.0.partition_point(|&x| x < date - DATE_MATCH_TOL);
        (idx < self.0.len() && (self.0[idx] - date).abs() <= DATE_MATCH_TOL).then_some(idx)
    }

    pub fn approx_eq(&self, other: &DateGrid) -> bool {
        self.len() == other.len()
            && self
                .0
                .iter()
                .zip(&other.0)
                .all(|(a, b)| (a - b).abs() <= DATE_MATCH_TOL)
    }
}

impl TryFrom<Vec<f64>> for DateGrid {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<DateGrid> for Vec<f64> {
    fn from(g: DateGrid) -> Self {
        g.0
    }
}

/// Position vector `q` over the instruments of a market. Short positions are
/// negative entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Portfolio(pub DVector<f64>);

impl Portfolio {
    pub fn new(positions: Vec<f64>) -> Result<Self> {
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("portfolio"));
        }
        Ok(Self(DVector::from_vec(positions)))
    }

    pub fn zeros(m: usize) -> Self {
        Self(DVector::zeros(m))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        self.0.as_slice()
    }

    /// Rescale so that the largest absolute position is one. The zero
    /// portfolio is returned unchanged.
    pub fn normalized(&self) -> Self {
        let m = self.0.amax();
        if m > 0.0 {
            Self(&self.0 / m)
        } else {
            self.clone()
        }
    }
}

/// Instrument universe: prices `P` (length M) and cash flows `C` (M×N) on a
/// date grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Market {
    grid: DateGrid,
    prices: DVector<f64>,
    cashflows: DMatrix<f64>,
    ids: Vec<String>,
}

impl Market {
    pub fn new(grid: DateGrid, prices: DVector<f64>, cashflows: DMatrix<f64>) -> Result<Self> {
        let ids = (1..=prices.len()).map(|i| format!("I{i}")).collect();
        Self::with_ids(grid, prices, cashflows, ids)
    }

    pub fn with_ids(
        grid: DateGrid,
        prices: DVector<f64>,
        cashflows: DMatrix<f64>,
        ids: Vec<String>,
    ) -> Result<Self> {
        let m = prices.len();
        if m == 0 {
            return Err(Error::DimensionMismatch(
                "market needs at least one instrument".into(),
            ));
        }
        if cashflows.nrows() != m || cashflows.ncols() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "cash-flow matrix is {}x{}, expected {}x{}",
                cashflows.nrows(),
                cashflows.ncols(),
                m,
                grid.len()
            )));
        }
        if ids.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "{} ids for {m} instruments",
                ids.len()
            )));
        }
        if prices.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("prices"));
        }
        if cashflows.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("cash flows"));
        }
        Ok(Self {
            grid,
            prices,
            cashflows,
            ids,
        })
    }

    /// Convenience constructor from row-major nested vectors.
    pub fn from_rows(dates: Vec<f64>, prices: Vec<f64>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let grid = DateGrid::new(dates)?;
        let n = grid.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "every cash-flow row must have {n} entries"
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let c = DMatrix::from_row_slice(rows.len(), n, &flat);
        Self::new(grid, DVector::from_vec(prices), c)
    }

    pub fn grid(&self) -> &DateGrid {
        &self.grid
    }

    pub fn prices(&self) -> &DVector<f64> {
        &self.prices
    }

    pub fn cashflows(&self) -> &DMatrix<f64> {
        &self.cashflows
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Number of instruments M.
    pub fn n_instruments(&self) -> usize {
        self.prices.len()
    }

    /// Number of dates N.
    pub fn n_dates(&self) -> usize {
        self.grid.len()
    }

    /// Same instruments and prices with a replaced cash-flow matrix.
    pub fn with_cashflows(&self, cashflows: DMatrix<f64>) -> Result<Self> {
        Self::with_ids(
            self.grid.clone(),
            self.prices.clone(),
            cashflows,
            self.ids.clone(),
        )
    }

    fn check_portfolio(&self, q: &Portfolio) -> Result<()> {
        if q.len() != self.n_instruments() {
            return Err(Error::DimensionMismatch(format!(
                "portfolio has {} positions, market has {} instruments",
                q.len(),
                self.n_instruments()
            )));
        }
        Ok(())
    }

    /// Price `qᵀP`.
    pub fn portfolio_price(&self, q: &Portfolio) -> Result<f64> {
        self.check_portfolio(q)?;
        Ok(q.0.dot(&self.prices))
    }

    /// Cash flows `qᵀC`, one entry per grid date.
    pub fn portfolio_cashflows(&self, q: &Portfolio) -> Result<DVector<f64>> {
        self.check_portfolio(q)?;
        Ok(self.cashflows.tr_mul(&q.0))
    }

    /// Largest absolute price, ‖P‖∞.
    pub fn price_scale(&self) -> f64 {
        self.prices.amax()
    }

    /// Largest absolute cash flow, ‖C‖∞ (entrywise).
    pub fn cashflow_scale(&self) -> f64 {
        self.cashflows.amax()
    }
}

/// Expected liability cash flows `Z` on a market's grid. Signs are
/// unrestricted; an exact zero means no payment at that date.
#[derive(Debug, Clone, PartialEq)]
pub struct LiabilitySchedule {
    grid: DateGrid,
    amounts: DVector<f64>,
}

impl LiabilitySchedule {
    pub fn new(grid: DateGrid, amounts: Vec<f64>) -> Result<Self> {
        if amounts.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} liability amounts for {} dates",
                amounts.len(),
                grid.len()
            )));
        }
        if amounts.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("liabilities"));
        }
        Ok(Self {
            grid,
            amounts: DVector::from_vec(amounts),
        })
    }

    /// Liability schedule on the grid of `market`.
    pub fn for_market(market: &Market, amounts: Vec<f64>) -> Result<Self> {
        Self::new(market.grid().clone(), amounts)
    }

    pub fn grid(&self) -> &DateGrid {
        &self.grid
    }

    pub fn amounts(&self) -> &DVector<f64> {
        &self.amounts
    }

    /// Indices `j` with `Z_j != 0` (exact comparison).
    pub fn payment_indices(&self) -> Vec<usize> {
        self.amounts
            .iter()
            .enumerate()
            .filter(|(_, &z)| z != 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn ensure_matches(&self, market: &Market) -> Result<()> {
        if self.grid.approx_eq(market.grid()) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}
