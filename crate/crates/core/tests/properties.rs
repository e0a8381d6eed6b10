use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use staticarb::instruments::{execution_schedule, swap_repo_matrices, SwapSpec, SwapUniverseSpec};
use staticarb::io::{market_from_str, write_cashflows, write_instruments};
use staticarb::{DateGrid, DiscountCurve, Market, Portfolio};

fn dates(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..2.0, n).prop_map(|steps| {
        let mut t = 0.0;
        steps
            .into_iter()
            .map(|s| {
                t += s;
                t
            })
            .collect()
    })
}

prop_compose! {
    fn market()(m in 1usize..6, n in 1usize..6)
        (grid in dates(n),
         prices in prop::collection::vec(-2.0f64..2.0, m),
         flows in prop::collection::vec(prop_oneof![Just(0.0), -5.0f64..5.0], m * n),
         m in Just(m), n in Just(n)) -> Market {
        Market::new(
            DateGrid::new(grid).unwrap(),
            DVector::from_vec(prices),
            DMatrix::from_row_slice(m, n, &flows),
        ).unwrap()
    }
}

prop_compose! {
    fn curve()(n in 1usize..7)
        (times in dates(n), vals in prop::collection::vec(0.0f64..1.5, n), y in 0.0f64..0.2) -> DiscountCurve {
        let grid = DateGrid::new(times).unwrap();
        DiscountCurve::from_discount_vector(&grid, &vals, y).unwrap()
    }
}

prop_compose! {
    fn universe()(n in 1usize..8, m in 1usize..6)
        (accrual in prop_oneof![Just(0.25), Just(0.5), Just(1.0)],
         swaps in prop::collection::vec((1..=n, -0.02f64..0.08), m),
         fixings in prop::collection::vec(-0.01f64..0.06, n)) -> SwapUniverseSpec {
        SwapUniverseSpec {
            accrual,
            swaps: swaps.into_iter().map(|(periods, rate)| SwapSpec { periods, rate }).collect(),
            fixings,
        }
    }
}

fn portfolio(m: usize) -> impl Strategy<Value = Portfolio> {
    prop::collection::vec(-10.0f64..10.0, m).prop_map(|v| Portfolio::new(v).unwrap())
}

fn market_and_portfolios() -> impl Strategy<Value = (Market, Portfolio, Portfolio)> {
    market().prop_flat_map(|mk| {
        let m = mk.n_instruments();
        (Just(mk), portfolio(m), portfolio(m))
    })
}

proptest! {
    #[test]
    fn price_and_cashflows_are_linear(
        (mk, q1, q2) in market_and_portfolios(),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let combo = Portfolio(&q1.0 * a + &q2.0 * b);
        let lhs = mk.portfolio_price(&combo).unwrap();
        let rhs = a * mk.portfolio_price(&q1).unwrap() + b * mk.portfolio_price(&q2).unwrap();
        let scale = 1.0 + mk.price_scale() * (a.abs() * q1.0.amax() + b.abs() * q2.0.amax());
        prop_assert!((lhs - rhs).abs() <= 1e-13 * scale * mk.n_instruments() as f64);

        let lhs = mk.portfolio_cashflows(&combo).unwrap();
        let rhs = mk.portfolio_cashflows(&q1).unwrap() * a + mk.portfolio_cashflows(&q2).unwrap() * b;
        let scale = 1.0 + mk.cashflow_scale() * (a.abs() * q1.0.amax() + b.abs() * q2.0.amax());
        prop_assert!((lhs - rhs).amax() <= 1e-13 * scale * mk.n_instruments() as f64);
    }

    #[test]
    fn pricing_identity((mk, q, _) in market_and_portfolios(), g in curve()) {
        // reprice the market with a curve on its own grid
        let gv = DVector::from_iterator(mk.n_dates(), mk.grid().dates().iter().map(|&t| g.eval(t).unwrap()));
        let priced = Market::new(mk.grid().clone(), mk.cashflows() * &gv, mk.cashflows().clone()).unwrap();
        let lhs = priced.portfolio_price(&q).unwrap();
        let rhs = priced.portfolio_cashflows(&q).unwrap().dot(&gv);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + priced.price_scale() * q.0.amax()));
    }

    #[test]
    fn curve_reproduces_knots_and_is_lipschitz(g in curve(), frac in prop::collection::vec(0.0f64..1.0, 32)) {
        for (&t, &v) in g.knot_times().iter().zip(g.knot_values()) {
            prop_assert_eq!(g.eval(t).unwrap(), v);
        }
        // beyond the last knot the slope is bounded by y·g(x_N)
        let tail = g.long_end_yield() * g.knot_values().last().unwrap().abs();
        let lip = g.max_slope().max(tail);
        let horizon = g.last_time() * 1.5;
        let h = 1e-6;
        for f in frac {
            let t = f * horizon;
            let d = (g.eval(t + h).unwrap() - g.eval(t).unwrap()).abs();
            prop_assert!(d <= lip * h + 1e-14, "jump {} at {}", d, t);
        }
    }

    #[test]
    fn ledger_matches_matrices(spec in universe(), seed in prop::collection::vec(-5.0f64..5.0, 6)) {
        let q = Portfolio::new(seed[..spec.swaps.len()].to_vec()).unwrap();
        let mats = swap_repo_matrices(&spec).unwrap();
        let ledger = execution_schedule(&spec, &q).unwrap();
        let net = mats.cashflows().tr_mul(&q.0);
        let repo = mats.repo_net().tr_mul(&q.0);
        let swap = mats.swap_net().tr_mul(&q.0);
        for (j, e) in ledger.entries.iter().enumerate() {
            prop_assert!((e.net - net[j]).abs() <= 1e-12);
            prop_assert!((e.repo_flow() - repo[j]).abs() <= 1e-12);
            prop_assert!((e.swap_flow() - swap[j]).abs() <= 1e-12);
        }
        prop_assert_eq!(ledger.repo_investment, q.0.sum());
        // every row of F has exactly one unit entry, at the maturity column
        for (i, sw) in spec.swaps.iter().enumerate() {
            let row = mats.f.row(i);
            prop_assert_eq!(row.iter().filter(|&&x| x == 1.0).count(), 1);
            prop_assert_eq!(row[sw.periods - 1], 1.0);
        }
    }

    #[test]
    fn csv_round_trip(mk in market()) {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_instruments(&mk, &mut a).unwrap();
        write_cashflows(&mk, &mut b).unwrap();
        let back = market_from_str(std::str::from_utf8(&a).unwrap(), std::str::from_utf8(&b).unwrap()).unwrap();
        prop_assert_eq!(&back, &mk);
        let (mut a2, mut b2) = (Vec::new(), Vec::new());
        write_instruments(&back, &mut a2).unwrap();
        write_cashflows(&back, &mut b2).unwrap();
        prop_assert_eq!(a, a2);
        prop_assert_eq!(b, b2);
    }
}

#[test]
fn portfolio_cashflow_examples() {
    let mk = Market::from_rows(
        vec![1.0, 2.0],
        vec![1.0, 0.05],
        vec![vec![1.0, 0.0], vec![0.05, 1.0]],
    )
    .unwrap();
    let flows = mk
        .portfolio_cashflows(&Portfolio::new(vec![-0.05, 1.0]).unwrap())
        .unwrap();
    assert!(flows[0].abs() < 1e-15 && flows[1] == 1.0);
    assert_eq!(
        mk.portfolio_cashflows(&Portfolio::zeros(2)).unwrap().amax(),
        0.0
    );

    let one = Market::from_rows(vec![1.0, 2.0], vec![1.0], vec![vec![1.0, 2.0]]).unwrap();
    let flows = one
        .portfolio_cashflows(&Portfolio::new(vec![3.0]).unwrap())
        .unwrap();
    assert_eq!(flows.as_slice(), &[3.0, 6.0]);
}
