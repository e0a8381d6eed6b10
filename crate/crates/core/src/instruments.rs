//! Instrument constructors: coupon bonds and swap–repo synthetic bonds.
//!
//! A receiver swap `i` with accrual `Δ`, `n_i` periods and fixed rate `R_i`
//! pays `Δ·R_i − ξ_j` at every `x_j = jΔ ≤ n_iΔ`. Rolling a unit repo
//! investment alongside it earns `ξ_j` per period and returns the unit at
//! `n_iΔ`. Collecting the legs in
//!
//! * `S_ij = Δ·R_i` for `j ≤ n_i` (fixed swap leg),
//! * `Ξ_ij = ξ_j` for `j ≤ n_i` (floating leg / repo interest),
//! * `F_ij = 1` for `j = n_i` (repo notional),
//!
//! the combined position has cash flows `C = S + F` and costs one unit at
//! inception, so `P = 1`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{DateGrid, Market, Portfolio};

/// Fixed-coupon bond: coupons `c_k` at `T_k` plus `face` at `T_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouponBondSpec {
    pub face: f64,
    pub coupon_dates: Vec<f64>,
    pub coupons: Vec<f64>,
}

impl CouponBondSpec {
    pub fn new(face: f64, coupon_dates: Vec<f64>, coupons: Vec<f64>) -> Result<Self> {
        let spec = Self {
            face,
            coupon_dates,
            coupons,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.face.is_finite() && self.face > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "face value must be positive, got {}",
                self.face
            )));
        }
        if self.coupon_dates.is_empty() {
            return Err(Error::InvalidSpec(
                "bond needs at least one payment date".into(),
            ));
        }
        if self.coupon_dates.len() != self.coupons.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coupon dates but {} coupons",
                self.coupon_dates.len(),
                self.coupons.len()
            )));
        }
        if self.coupons.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("coupons"));
        }
        let d = &self.coupon_dates;
        if d.iter().any(|t| !t.is_finite() || *t <= 0.0) || d.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSpec(
                "coupon dates must be positive and strictly increasing".into(),
            ));
        }
        Ok(())
    }

    pub fn maturity(&self) -> f64 {
        *self.coupon_dates.last().expect("validated non-empty")
    }
}

/// Cash-flow row of a coupon bond on `grid`.
pub fn bond_row(spec: &CouponBondSpec, grid: &DateGrid) -> Result<DVector<f64>> {
    spec.validate()?;
    let mut row = DVector::zeros(grid.len());
    let last = spec.coupon_dates.len() - 1;
    for (k, (&t, &c)) in spec.coupon_dates.iter().zip(&spec.coupons).enumerate() {
        let j = grid.position(t).ok_or(Error::DateNotInGrid(t))?;
        row[j] += if k == last { c + spec.face } else { c };
    }
    Ok(row)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwapSpec {
    /// Maturity in accrual periods, `n_i >= 1`.
    pub periods: usize,
    /// Fixed rate `R_i` per year.
    pub rate: f64,
}

/// Universe of receiver swaps sharing an accrual period and a repo fixing
/// per grid date. The grid is `{Δ, 2Δ, …, NΔ}` with `N = fixings.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwapUniverseSpec {
    pub accrual: f64,
    pub swaps: Vec<SwapSpec>,
    pub fixings: Vec<f64>,
}

/// The three leg matrices of a swap universe.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapRepoMatrices {
    pub s: DMatrix<f64>,
    pub xi: DMatrix<f64>,
    pub f: DMatrix<f64>,
}

impl SwapRepoMatrices {
    /// `C = S + F`.
    pub fn cashflows(&self) -> DMatrix<f64> {
        &self.s + &self.f
    }

    /// Net swap flows `S − Ξ`.
    pub fn swap_net(&self) -> DMatrix<f64> {
        &self.s - &self.xi
    }

    /// Net repo flows `Ξ + F`.
    pub fn repo_net(&self) -> DMatrix<f64> {
        &self.xi + &self.f
    }
}

impl SwapUniverseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.accrual.is_finite() && self.accrual > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "accrual must be positive, got {}",
                self.accrual
            )));
        }
        if self.swaps.is_empty() {
            return Err(Error::InvalidSpec(
                "swap universe has no instruments".into(),
            ));
        }
        if self.fixings.is_empty() {
            return Err(Error::InvalidSpec("no repo fixings given".into()));
        }
        if self.fixings.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("repo fixings"));
        }
        let n = self.fixings.len();
        for (i, s) in self.swaps.iter().enumerate() {
            if !s.rate.is_finite() {
                return Err(Error::NonFinite("swap rates"));
            }
            if s.periods == 0 || s.periods > n {
                return Err(Error::InvalidSpec(format!(
                    "swap {} matures after {} periods; grid has {} fixing dates",
                    i + 1,
                    s.periods,
                    n
                )));
            }
        }
        Ok(())
    }

    pub fn n_swaps(&self) -> usize {
        self.swaps.len()
    }

    pub fn n_dates(&self) -> usize {
        self.fixings.len()
    }

    /// `x_j = jΔ`, `j = 1..=N`.
    pub fn grid(&self) -> Result<DateGrid> {
        self.validate()?;
        DateGrid::new(
            (1..=self.n_dates())
                .map(|j| j as f64 * self.accrual)
                .collect(),
        )
    }

    pub fn ids(&self) -> Vec<String> {
        (1..=self.n_swaps()).map(|i| format!("SW{i}")).collect()
    }
}

pub fn swap_repo_matrices(spec: &SwapUniverseSpec) -> Result<SwapRepoMatrices> {
    spec.validate()?;
    let (m, n) = (spec.n_swaps(), spec.n_dates());
    let mut s = DMatrix::zeros(m, n);
    let mut xi = DMatrix::zeros(m, n);
    let mut f = DMatrix::zeros(m, n);
    for (i, sw) in spec.swaps.iter().enumerate() {
        for j in 0..sw.periods {
            s[(i, j)] = spec.accrual * sw.rate;
            xi[(i, j)] = spec.fixings[j];
        }
        f[(i, sw.periods - 1)] = 1.0;
    }
    Ok(SwapRepoMatrices { s, xi, f })
}

/// Market of synthetic coupon bonds: `C = S + F`, `P = 1`.
pub fn synthetic_market(spec: &SwapUniverseSpec) -> Result<Market> {
    let mats = swap_repo_matrices(spec)?;
    Market::with_ids(
        spec.grid()?,
        DVector::from_element(spec.n_swaps(), 1.0),
        mats.cashflows(),
        spec.ids(),
    )
}

/// Operational flows at one payment date, aggregated over the portfolio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub date: f64,
    /// Repo matures: interest plus notional received.
    pub repo_receipt: f64,
    /// Notional rolled into the next repo period.
    pub repo_reinvest: f64,
    /// Floating interest paid on the swaps.
    pub floating_offset: f64,
    /// Fixed interest received on the swaps.
    pub fixed_interest: f64,
    pub net: f64,
}

impl LedgerEntry {
    /// `(qᵀ(Ξ + F))_j`.
    pub fn repo_flow(&self) -> f64 {
        self.repo_receipt - self.repo_reinvest
    }

    /// `(qᵀ(S − Ξ))_j`.
    pub fn swap_flow(&self) -> f64 {
        self.fixed_interest - self.floating_offset
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExecutionLedger {
    /// Amount invested in repo at inception, `qᵀ1`; the swaps cost nothing.
    pub repo_investment: f64,
    pub entries: Vec<LedgerEntry>,
}

/// Walk the execution steps of the swap–repo program for portfolio `q`.
pub fn execution_schedule(spec: &SwapUniverseSpec, q: &Portfolio) -> Result<ExecutionLedger> {
    let mats = swap_repo_matrices(spec)?;
    if q.len() != spec.n_swaps() {
        return Err(Error::DimensionMismatch(format!(
            "portfolio has {} positions, universe has {} swaps",
            q.len(),
            spec.n_swaps()
        )));
    }
    if q.0.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("portfolio"));
    }
    let grid = spec.grid()?;
    let fixed = mats.s.tr_mul(&q.0);
    let floating = mats.xi.tr_mul(&q.0);
    let entries = (0..spec.n_dates())
        .map(|j| {
            let (mut receipt, mut reinvest) = (0.0, 0.0);
            for (i, sw) in spec.swaps.iter().enumerate() {
                if j < sw.periods {
                    receipt += q.0[i] * (spec.fixings[j] + 1.0);
                }
                if j + 1 < sw.periods {
                    reinvest += q.0[i];
                }
            }
            let mut e = LedgerEntry {
                date: grid.dates()[j],
                repo_receipt: receipt,
                repo_reinvest: reinvest,
                floating_offset: floating[j],
                fixed_interest: fixed[j],
                net: 0.0,
            };
            e.net = e.repo_flow() + e.swap_flow();
            e
        })
        .collect();
    Ok(ExecutionLedger {
        repo_investment: q.0.sum(),
        entries,
    })
}

impl ExecutionLedger {
    pub fn nets(&self) -> DVector<f64> {
        DVector::from_iterator(self.entries.len(), self.entries.iter().map(|e| e.net))
    }

    /// Plain-text table, one line per date.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "inception: repo investment {:.12e}, swaps 0",
            self.repo_investment
        );
        let _ = writeln!(
            out,
            "{:>10} {:>20} {:>20} {:>20} {:>20} {:>20}",
            "date", "t1_repo_receipt", "t2_repo_reinvest", "t3_floating", "t4_fixed", "net"
        );
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{:>10.4} {:>20.12e} {:>20.12e} {:>20.12e} {:>20.12e} {:>20.12e}",
                e.date, e.repo_receipt, e.repo_reinvest, e.floating_offset, e.fixed_interest, e.net
            );
        }
        out
    }
}
