//! Shared generators and independent oracles for the integration suites.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use staticarb::lp::{enumerate_extreme_rays, enumerate_vertices, LpBuilder, LpProblem, LpStatus};
use staticarb::{DateGrid, DiscountCurve, Market};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random LP with small integer data and all variables sign-constrained, so
/// the feasible region is pointed and brute force can decide its status.
pub fn random_lp(rng: &mut ChaCha8Rng) -> LpProblem {
    let n = rng.gen_range(1..=8);
    let k = rng.gen_range(1..=8);
    let mut b = LpBuilder::new(n);
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect();
    b = b.minimize(&c);
    // half the instances are built around a known feasible point
    let anchor: Option<Vec<f64>> = rng
        .gen_bool(0.5)
        .then(|| (0..n).map(|_| rng.gen_range(0..=3) as f64).collect());
    for _ in 0..k {
        let row: Vec<f64> = (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect();
        let kind = rng.gen_range(0..3);
        let rhs = match &anchor {
            Some(x) => {
                let at: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
                let slack = rng.gen_range(0..=2) as f64;
                match kind {
                    0 => at,
                    1 => at - slack,
                    _ => at + slack,
                }
            }
            None => rng.gen_range(-4..=4) as f64,
        };
        b = match kind {
            0 => b.eq(&row, rhs),
            1 => b.ge(&row, rhs),
            _ => b.le(&row, rhs),
        };
    }
    b.build().unwrap()
}

/// Status and optimal value decided by enumerating vertices and extreme rays.
pub fn brute_force(p: &LpProblem) -> (LpStatus, Option<f64>) {
    let verts = enumerate_vertices(p).unwrap();
    if verts.is_empty() {
        return (LpStatus::Infeasible, None);
    }
    let rays = enumerate_extreme_rays(p).unwrap();
    if rays.iter().any(|d| p.objective.dot(d) < -1e-9) {
        return (LpStatus::Unbounded, None);
    }
    let best = verts
        .iter()
        .map(|v| p.objective.dot(v))
        .fold(f64::INFINITY, f64::min);
    (LpStatus::Optimal, Some(best))
}

/// Strictly positive, decreasing discount vector on a grid.
pub fn random_positive_curve(rng: &mut ChaCha8Rng, grid: &DateGrid) -> DiscountCurve {
    let mut v = Vec::with_capacity(grid.len());
    let mut prev_t = 0.0;
    let mut g = 1.0_f64;
    for &t in grid.dates() {
        let rate: f64 = rng.gen_range(0.0..0.08);
        g *= (-rate * (t - prev_t)).exp();
        v.push(g);
        prev_t = t;
    }
    DiscountCurve::from_discount_vector(grid, &v, 0.0).unwrap()
}

pub fn random_grid(rng: &mut ChaCha8Rng, n: usize) -> DateGrid {
    let mut t = 0.0;
    let dates = (0..n)
        .map(|_| {
            t += rng.gen_range(0.25..1.5);
            (t * 1e6_f64).round() / 1e6
        })
        .collect();
    DateGrid::new(dates).unwrap()
}

pub fn random_cashflows(rng: &mut ChaCha8Rng, m: usize, n: usize, nonneg: bool) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| {
        if rng.gen_bool(0.35) {
            0.0
        } else if nonneg {
            rng.gen_range(0.0..2.0)
        } else {
            rng.gen_range(-1.0..2.0)
        }
    })
}

/// Market priced exactly by a strictly positive curve.
pub fn arbitrage_free_market(rng: &mut ChaCha8Rng, m: usize, n: usize) -> (Market, DiscountCurve) {
    let grid = random_grid(rng, n);
    let curve = random_positive_curve(rng, &grid);
    let nonneg = rng.gen_bool(0.5);
    let c = random_cashflows(rng, m, n, nonneg);
    let p = &c * curve.on_grid(&grid);
    (Market::new(grid, p, c).unwrap(), curve)
}

/// Arbitrage-free market with prices shifted by random noise.
pub fn perturbed_market(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Market {
    let (mk, _) = arbitrage_free_market(rng, m, n);
    let noise = DVector::from_fn(m, |_, _| rng.gen_range(-0.3..0.3));
    Market::new(
        mk.grid().clone(),
        mk.prices() + noise,
        mk.cashflows().clone(),
    )
    .unwrap()
}
