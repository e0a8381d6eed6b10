//! Super-replication against brute-force dual and obstruction oracles.

mod common;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use staticarb::instruments::{synthetic_market, SwapSpec, SwapUniverseSpec};
use staticarb::lp::{enumerate_vertices, LpBuilder};
use staticarb::replication::{check_feasibility, superreplicate};
use staticarb::{Error, LiabilitySchedule, Market, TolerancePolicy};

use common::{arbitrage_free_market, random_cashflows, random_grid, rng};

/// `max { Z v : C v = P, v >= 0 }` over the vertices of the dual polytope.
fn dual_value_by_vertices(mk: &Market, z: &DVector<f64>) -> Option<f64> {
    let mut b = LpBuilder::new(mk.n_dates());
    for i in 0..mk.n_instruments() {
        let row: Vec<f64> = mk.cashflows().row(i).iter().copied().collect();
        b = b.eq(&row, mk.prices()[i]);
    }
    let verts = enumerate_vertices(&b.build().unwrap()).unwrap();
    verts.iter().map(|v| z.dot(v)).reduce(f64::max)
}

/// `{v >= 0 : C v = 0, Z v = 1}` is non-empty.
fn obstruction_exists(c: &DMatrix<f64>, z: &DVector<f64>) -> bool {
    let n = c.ncols();
    let mut b = LpBuilder::new(n);
    for i in 0..c.nrows() {
        let row: Vec<f64> = c.row(i).iter().copied().collect();
        b = b.eq(&row, 0.0);
    }
    b = b.eq(z.as_slice(), 1.0);
    !enumerate_vertices(&b.build().unwrap()).unwrap().is_empty()
}

fn random_liability(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| {
        if rng.gen_bool(0.3) {
            0.0
        } else {
            rng.gen_range(-1.0..3.0)
        }
    })
}

/// Cash flows with a strictly positive kernel vector `w`: `C w = 0`.
fn kernel_cashflows(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
    let mut c = random_cashflows(rng, m, n, false);
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
    for i in 0..m {
        let s: f64 = (0..n - 1).map(|j| c[(i, j)] * w[j]).sum();
        c[(i, n - 1)] = -s / w[n - 1];
    }
    c
}

#[test]
fn cost_equals_enumerated_dual_value() {
    let tol = TolerancePolicy::default();
    let mut r = rng(21);
    let mut checked = 0;
    while checked < 150 {
        let n = r.gen_range(1..=6);
        let m = r.gen_range(1..=7);
        let (mk, _) = arbitrage_free_market(&mut r, m, n);
        let z = LiabilitySchedule::for_market(&mk, random_liability(&mut r, n).as_slice().to_vec())
            .unwrap();
        match superreplicate(&mk, &z, &tol) {
            Ok(res) => {
                let dual =
                    dual_value_by_vertices(&mk, z.amounts()).expect("dual polytope is non-empty");
                assert!(
                    (res.cost - dual).abs() <= 1e-7 * res.cost.abs().max(1.0),
                    "cost {} vs dual {}",
                    res.cost,
                    dual
                );
                assert!(res.slack.min() >= -1e-9);
                let v = &res.dual_discount;
                assert!(v.min() >= -1e-9);
                assert!((mk.cashflows() * v - mk.prices()).amax() <= 1e-8);
                assert!((z.amounts().dot(v) - res.cost).abs() <= 1e-7 * res.cost.abs().max(1.0));
                checked += 1;
            }
            Err(Error::InfeasibleLiability { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn feasibility_dichotomy_with_kernels() {
    let tol = TolerancePolicy::default();
    let mut r = rng(22);
    let mut outcomes = [0usize; 2];
    for k in 0..200 {
        let n = r.gen_range(2..=6);
        let m = r.gen_range(1..=6);
        let c = if k % 2 == 0 {
            kernel_cashflows(&mut r, m, n)
        } else {
            random_cashflows(&mut r, m, n, false)
        };
        let mk = Market::new(random_grid(&mut r, n), DVector::zeros(m), c.clone()).unwrap();
        let z = random_liability(&mut r, n);
        let sched = LiabilitySchedule::for_market(&mk, z.as_slice().to_vec()).unwrap();
        let cert = check_feasibility(&mk, &sched, &tol).unwrap();
        assert_eq!(cert.feasible, !obstruction_exists(&c, &z), "instance {k}");
        if cert.feasible {
            let q = cert.portfolio.unwrap();
            let flows = mk.portfolio_cashflows(&q).unwrap();
            assert!((flows - &z).min() >= -1e-8 * q.0.amax().max(1.0));
            outcomes[0] += 1;
        } else {
            let v = cert.obstruction.unwrap();
            assert!(v.min() >= 0.0);
            assert!((&c * &v).amax() <= 1e-9);
            assert!(z.dot(&v) > 1e-9);
            outcomes[1] += 1;
        }
    }
    assert!(outcomes[0] > 40 && outcomes[1] > 40, "{outcomes:?}");
}

#[test]
fn adding_an_instrument_never_raises_cost() {
    let tol = TolerancePolicy::default();
    let mut r = rng(23);
    let mut checked = 0;
    for _ in 0..200 {
        let n = r.gen_range(1..=5);
        let m = r.gen_range(1..=5);
        let (big, _) = arbitrage_free_market(&mut r, m + 1, n);
        let small = Market::new(
            big.grid().clone(),
            big.prices().rows(0, m).into_owned(),
            big.cashflows().rows(0, m).into_owned(),
        )
        .unwrap();
        let z = random_liability(&mut r, n);
        let Ok(before) = superreplicate(
            &small,
            &LiabilitySchedule::for_market(&small, z.as_slice().to_vec()).unwrap(),
            &tol,
        ) else {
            continue;
        };
        // the old optimum padded with a zero position stays admissible at
        // the same price
        let padded = before.portfolio.0.clone().insert_row(m, 0.0);
        assert!((big.cashflows().tr_mul(&padded) - &z).min() >= -1e-9);
        assert!(
            (big.prices().dot(&padded) - before.cost).abs() <= 1e-12 * before.cost.abs().max(1.0)
        );

        let after = superreplicate(
            &big,
            &LiabilitySchedule::for_market(&big, z.as_slice().to_vec()).unwrap(),
            &tol,
        )
        .unwrap();
        assert!(after.cost <= before.cost + 1e-9 * before.cost.abs().max(1.0));
        checked += 1;
    }
    assert!(checked > 50);
}

#[test]
fn swap_repo_program_costs_sum_of_positions() {
    let tol = TolerancePolicy::default();
    let spec = SwapUniverseSpec {
        accrual: 1.0,
        swaps: vec![
            SwapSpec {
                periods: 1,
                rate: 0.02,
            },
            SwapSpec {
                periods: 2,
                rate: 0.025,
            },
            SwapSpec {
                periods: 3,
                rate: 0.03,
            },
        ],
        fixings: vec![0.01, 0.02, 0.03],
    };
    let mk = synthetic_market(&spec).unwrap();
    let z = LiabilitySchedule::for_market(&mk, vec![1.0, 2.0, 1.5]).unwrap();
    let res = superreplicate(&mk, &z, &tol).unwrap();
    assert!((res.cost - res.portfolio.0.sum()).abs() < 1e-12);
    // C is square and triangular: the program replicates exactly
    assert!(res.slack.amax() < 1e-10);
}

#[test]
fn triangular_example_matches_forward_substitution() {
    let tol = TolerancePolicy::default();
    let c = [[1.0, 0.0, 0.0], [0.05, 1.05, 0.0], [0.04, 0.04, 1.04]];
    let g = [0.97, 0.94, 0.91];
    let prices: Vec<f64> = c
        .iter()
        .map(|r| r.iter().zip(&g).map(|(a, b)| a * b).sum())
        .collect();
    let mk = Market::from_rows(
        vec![1.0, 2.0, 3.0],
        prices,
        c.iter().map(|r| r.to_vec()).collect(),
    )
    .unwrap();
    let z = LiabilitySchedule::for_market(&mk, vec![1.0, 1.0, 1.0]).unwrap();
    let res = superreplicate(&mk, &z, &tol).unwrap();
    // qᵀC = Z with C lower triangular: solve from the last date backwards
    let q3 = 1.0 / 1.04;
    let q2 = (1.0 - 0.04 * q3) / 1.05;
    let q1 = 1.0 - 0.05 * q2 - 0.04 * q3;
    let expected = [q1, q2, q3];
    for i in 0..3 {
        assert!((res.portfolio.0[i] - expected[i]).abs() < 1e-12);
    }
    assert!((res.cost - 2.82).abs() < 1e-12);
}
