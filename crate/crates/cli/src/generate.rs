//! Seeded synthetic test data (`gen`).

use std::path::PathBuf;

use anyhow::{ensure, Result};
use clap::{Args, ValueEnum};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use staticarb::{io, DateGrid, DiscountCurve, LiabilitySchedule, Market};

use crate::commands::{exit, Outcome};
use crate::report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// Prices from a random strictly positive curve.
    Free,
    /// Curve prices plus noise.
    Perturbed,
    /// Unrelated prices.
    Random,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub instruments: usize,
    #[arg(long, default_value_t = 4)]
    pub dates: usize,
    #[arg(long, value_enum, default_value_t = Kind::Free)]
    pub kind: Kind,
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn generate(args: &GenArgs) -> Result<Outcome> {
    ensure!(
        args.instruments > 0 && args.dates > 0,
        "need at least one instrument and one date"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (m, n) = (args.instruments, args.dates);

    let mut t = 0.0;
    let dates: Vec<f64> = (0..n)
        .map(|_| {
            t += rng.gen_range(0.25..1.5);
            (t * 1e4_f64).round() / 1e4
        })
        .collect();
    let grid = DateGrid::new(dates)?;
    let mut g = 1.0_f64;
    let mut prev = 0.0;
    let discount: Vec<f64> = grid
        .dates()
        .iter()
        .map(|&x| {
            g *= (-rng.gen_range(0.0..0.08) * (x - prev)).exp();
            prev = x;
            g
        })
        .collect();
    let curve = DiscountCurve::from_discount_vector(&grid, &discount, 0.0)?;

    let c = DMatrix::from_fn(m, n, |_, _| {
        if rng.gen_bool(0.35) {
            0.0
        } else {
            rng.gen_range(0.0..2.0)
        }
    });
    let fair = &c * DVector::from_vec(discount);
    let prices = match args.kind {
        Kind::Free => fair,
        Kind::Perturbed => fair + DVector::from_fn(m, |_, _| rng.gen_range(-0.3..0.3)),
        Kind::Random => DVector::from_fn(m, |_, _| rng.gen_range(-1.0..2.0)),
    };
    let market = Market::new(grid.clone(), prices, c)?;
    let z: Vec<f64> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.3) {
                0.0
            } else {
                rng.gen_range(0.0..3.0)
            }
        })
        .collect();
    let liab = LiabilitySchedule::new(grid, z)?;

    std::fs::create_dir_all(&args.out_dir)?;
    let files = [
        args.out_dir.join("instruments.csv"),
        args.out_dir.join("cashflows.csv"),
        args.out_dir.join("liabilities.csv"),
        args.out_dir.join("curve.json"),
    ];
    io::write_instruments(&market, std::fs::File::create(&files[0])?)?;
    io::write_cashflows(&market, std::fs::File::create(&files[1])?)?;
    io::write_liabilities(&liab, std::fs::File::create(&files[2])?)?;
    std::fs::write(&files[3], serde_json::to_string_pretty(&curve)? + "\n")?;

    let mut rep = report::header("gen", &market);
    rep.insert("seed".into(), json!(args.seed));
    rep.insert(
        "kind".into(),
        json!(format!("{:?}", args.kind).to_lowercase()),
    );
    rep.insert(
        "written".into(),
        json!(files
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()),
    );
    Ok(Outcome {
        exit: exit::OK,
        report: serde_json::Value::Object(rep),
        inputs: Vec::new(),
        lps: Vec::new(),
    })
}
