use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde_json::{json, Value};
use staticarb::arbitrage::{verdict_problems, ArbitrageLevel};
use staticarb::instruments::{execution_schedule, synthetic_market, SwapUniverseSpec};
use staticarb::lp::LpProblem;
use staticarb::replication::{
    aggregate_buffer, aggregate_forward, hedge_quadratic, quadratic_objective, superreplicate,
    superreplication_problem,
};
use staticarb::{
    check_arbitrage, io, DiscountCurve, Error, LiabilitySchedule, Market, Portfolio,
    TolerancePolicy,
};

use crate::report::{self, num, vector};

pub mod exit {
    pub const OK: i32 = 0;
    pub const INPUT: i32 = 1;
    pub const STRICT_ARBITRAGE: i32 = 2;
    pub const ARBITRAGE: i32 = 3;
    pub const LAW_OF_ONE_PRICE: i32 = 4;
    pub const INFEASIBLE: i32 = 5;
    pub const UNBOUNDED: i32 = 6;
}

pub fn level_code(level: ArbitrageLevel) -> i32 {
    match level {
        ArbitrageLevel::ArbitrageFree => exit::OK,
        ArbitrageLevel::StrictArbitrage => exit::STRICT_ARBITRAGE,
        ArbitrageLevel::Arbitrage => exit::ARBITRAGE,
        ArbitrageLevel::LawOfOnePriceFails => exit::LAW_OF_ONE_PRICE,
    }
}

/// What a command produced: a JSON report, its exit code, the files it read
/// and the linear programs it set up.
pub struct Outcome {
    pub exit: i32,
    pub report: Value,
    pub inputs: Vec<PathBuf>,
    pub lps: Vec<(String, LpProblem)>,
}

impl Outcome {
    /// Short result digest for the manifest.
    pub fn summary(&self) -> Value {
        let mut s = serde_json::Map::new();
        for key in ["level", "status", "cost", "objective"] {
            if let Some(v) = self.report.get(key) {
                s.insert(key.into(), v.clone());
            }
        }
        Value::Object(s)
    }
}

#[derive(Debug, Args)]
pub struct MarketArgs {
    /// Instrument prices, columns `id,price`.
    pub instruments: PathBuf,
    /// Cash flows in long format, columns `id,date,amount`.
    pub cashflows: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AggregationMode {
    Buffer,
    Forward,
}

#[derive(Debug, Args)]
pub struct LiabilityArgs {
    #[command(flatten)]
    pub market: MarketArgs,
    /// Liability cash flows, columns `date,amount`.
    pub liabilities: PathBuf,
    /// Roll intermediate payments onto liability dates before solving.
    #[arg(long, value_enum)]
    pub aggregate: Option<AggregationMode>,
    /// Curve JSON for forward aggregation; defaults to the fitted witness.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Solve the ridge hedge with this penalty instead of super-replicating.
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    #[command(flatten)]
    pub market: MarketArgs,
    pub liabilities: PathBuf,
    #[arg(long, value_enum)]
    pub mode: AggregationMode,
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Also write the aggregated market as a CSV pair into this directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Swap universe JSON: `{"accrual":Δ,"swaps":[{"periods":n,"rate":R}],"fixings":[…]}`.
    pub universe: PathBuf,
    /// Directory receiving `instruments.csv` and `cashflows.csv`.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// JSON array of swap positions; adds the execution ledger
    /// (`ledger.txt` in the output directory and `ledger` in the report).
    #[arg(long)]
    pub portfolio: Option<PathBuf>,
}

fn load_market(args: &MarketArgs) -> Result<Market> {
    Ok(io::load_market(&args.instruments, &args.cashflows)?)
}

fn verdict_report(market: &Market, tol: &TolerancePolicy) -> Result<(ArbitrageLevel, Value)> {
    let v = check_arbitrage(market, tol)?;
    let mut r = serde_json::Map::new();
    r.insert("level".into(), json!(v.level));
    r.insert("non_unique".into(), json!(v.non_unique));
    if let Some(c) = &v.witness_curve {
        r.insert("witness_curve".into(), report::curve(c));
    }
    if let Some(q) = &v.violating_portfolio {
        r.insert("portfolio".into(), vector(&q.0));
        r.insert("portfolio_price".into(), num(market.portfolio_price(q)?));
        r.insert(
            "portfolio_cashflows".into(),
            vector(&market.portfolio_cashflows(q)?),
        );
    }
    Ok((v.level, Value::Object(r)))
}

pub fn check(args: &MarketArgs, tol: &TolerancePolicy) -> Result<Outcome> {
    let market = load_market(args)?;
    let lps = verdict_problems(&market);
    let (level, verdict) = verdict_report(&market, tol)?;
    let mut report = report::header("check", &market);
    report.extend(verdict.as_object().cloned().unwrap_or_default());
    Ok(Outcome {
        exit: level_code(level),
        report: Value::Object(report),
        inputs: vec![args.instruments.clone(), args.cashflows.clone()],
        lps,
    })
}

fn resolve_curve(
    path: Option<&Path>,
    market: &Market,
    tol: &TolerancePolicy,
) -> Result<Option<DiscountCurve>> {
    if let Some(p) = path {
        return Ok(Some(
            io::load_curve(p).with_context(|| format!("loading curve {}", p.display()))?,
        ));
    }
    let v = check_arbitrage(market, tol)?;
    Ok(v.witness_curve
        .filter(|_| v.level == ArbitrageLevel::ArbitrageFree))
}

fn aggregate_market(
    market: &Market,
    liab: &LiabilitySchedule,
    mode: AggregationMode,
    curve: Option<&DiscountCurve>,
) -> Result<Market> {
    Ok(match mode {
        AggregationMode::Buffer => aggregate_buffer(market, liab)?,
        AggregationMode::Forward => aggregate_forward(
            market,
            liab,
            curve.expect("forward mode resolves a curve first"),
        )?,
    })
}

/// `superrep` (and `hedge`, which is `superrep --lambda`).
pub fn superrep(args: &LiabilityArgs, tol: &TolerancePolicy, command: &str) -> Result<Outcome> {
    let m = &args.market;
    let (market, liab) =
        io::load_market_with_liabilities(&m.instruments, &m.cashflows, &args.liabilities)?;
    let mut inputs = vec![
        m.instruments.clone(),
        m.cashflows.clone(),
        args.liabilities.clone(),
    ];
    if let Some(c) = &args.curve {
        inputs.push(c.clone());
    }
    let mut report = report::header(command, &market);
    let mut lps = verdict_problems(&market);

    let hedge_mode = args.lambda.is_some();
    if !hedge_mode {
        let (level, verdict) = verdict_report(&market, tol)?;
        if level != ArbitrageLevel::ArbitrageFree {
            report.insert("status".into(), json!("arbitrage_precluded"));
            report.extend(verdict.as_object().cloned().unwrap_or_default());
            return Ok(Outcome {
                exit: exit::ARBITRAGE,
                report: Value::Object(report),
                inputs,
                lps,
            });
        }
    }

    let working = match args.aggregate {
        None => market.clone(),
        Some(mode) => {
            let curve = if mode == AggregationMode::Forward {
                match resolve_curve(args.curve.as_deref(), &market, tol)? {
                    Some(c) => Some(c),
                    None => {
                        report.insert("status".into(), json!("arbitrage_precluded"));
                        report.insert(
                            "message".into(),
                            json!("forward aggregation needs --curve when the market is not arbitrage-free"),
                        );
                        return Ok(Outcome {
                            exit: exit::ARBITRAGE,
                            report: Value::Object(report),
                            inputs,
                            lps,
                        });
                    }
                }
            } else {
                None
            };
            let agg = aggregate_market(&market, &liab, mode, curve.as_ref())?;
            report.insert(
                "aggregation".into(),
                json!(format!("{mode:?}").to_lowercase()),
            );
            report.insert(
                "aggregated_cashflows".into(),
                report::matrix(agg.cashflows()),
            );
            if let Some(c) = &curve {
                report.insert("aggregation_curve".into(), report::curve(c));
            }
            agg
        }
    };

    if let Some(lambda) = args.lambda {
        let q = hedge_quadratic(&working, &liab, lambda)?;
        let residual = liab.amounts() - working.portfolio_cashflows(&q)?;
        report.insert("status".into(), json!("hedged"));
        report.insert("lambda".into(), num(lambda));
        report.insert("portfolio".into(), vector(&q.0));
        report.insert("cost".into(), num(working.portfolio_price(&q)?));
        report.insert("residual".into(), vector(&residual));
        report.insert(
            "objective".into(),
            num(quadratic_objective(&working, &liab, lambda, &q)),
        );
        return Ok(Outcome {
            exit: exit::OK,
            report: Value::Object(report),
            inputs,
            lps: Vec::new(),
        });
    }

    lps.push((
        "feasibility".into(),
        superreplication_problem(&working, &liab, false),
    ));
    lps.push((
        "superreplication".into(),
        superreplication_problem(&working, &liab, true),
    ));
    let exit = match superreplicate(&working, &liab, tol) {
        Ok(res) => {
            report.insert("status".into(), json!("optimal"));
            report.insert("portfolio".into(), vector(&res.portfolio.0));
            report.insert("cost".into(), num(res.cost));
            report.insert("slack".into(), vector(&res.slack));
            report.insert("dual_discount".into(), vector(&res.dual_discount));
            report.insert("possibly_non_unique".into(), json!(res.possibly_non_unique));
            report.insert("kernel_nontrivial".into(), json!(res.kernel_nontrivial));
            exit::OK
        }
        Err(Error::InfeasibleLiability { obstruction }) => {
            report.insert("status".into(), json!("infeasible"));
            report.insert("obstruction".into(), report::slice(&obstruction));
            exit::INFEASIBLE
        }
        Err(Error::ArbitragePrecluded { level, portfolio }) => {
            report.insert("status".into(), json!("arbitrage_precluded"));
            report.insert("level".into(), json!(level));
            if let Some(q) = portfolio {
                report.insert("portfolio".into(), report::slice(&q));
            }
            exit::ARBITRAGE
        }
        Err(Error::UnboundedBelow { ray }) => {
            report.insert("status".into(), json!("unbounded"));
            report.insert("ray".into(), report::slice(&ray));
            exit::UNBOUNDED
        }
        Err(e) => return Err(e.into()),
    };
    Ok(Outcome {
        exit,
        report: Value::Object(report),
        inputs,
        lps,
    })
}

pub fn aggregate(args: &AggregateArgs, tol: &TolerancePolicy) -> Result<Outcome> {
    let m = &args.market;
    let (market, liab) =
        io::load_market_with_liabilities(&m.instruments, &m.cashflows, &args.liabilities)?;
    let mut inputs = vec![
        m.instruments.clone(),
        m.cashflows.clone(),
        args.liabilities.clone(),
    ];
    let curve = match args.mode {
        AggregationMode::Buffer => None,
        AggregationMode::Forward => {
            let c = resolve_curve(args.curve.as_deref(), &market, tol)?;
            if c.is_none() {
                bail!("forward aggregation needs --curve when the market is not arbitrage-free");
            }
            c
        }
    };
    if let Some(c) = &args.curve {
        inputs.push(c.clone());
    }
    let agg = aggregate_market(&market, &liab, args.mode, curve.as_ref())?;
    let mut report = report::header("aggregate", &market);
    report.insert(
        "aggregation".into(),
        json!(format!("{:?}", args.mode).to_lowercase()),
    );
    report.insert("liabilities".into(), vector(liab.amounts()));
    report.insert(
        "aggregated_cashflows".into(),
        report::matrix(agg.cashflows()),
    );
    if let Some(dir) = &args.out_dir {
        let (i, c) = write_market(&agg, dir)?;
        report.insert(
            "written".into(),
            json!([i.display().to_string(), c.display().to_string()]),
        );
    }
    Ok(Outcome {
        exit: exit::OK,
        report: Value::Object(report),
        inputs,
        lps: Vec::new(),
    })
}

fn write_market(market: &Market, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let inst = dir.join("instruments.csv");
    let cf = dir.join("cashflows.csv");
    io::write_instruments(market, std::fs::File::create(&inst)?)?;
    io::write_cashflows(market, std::fs::File::create(&cf)?)?;
    Ok((inst, cf))
}

pub fn synth(args: &SynthArgs) -> Result<Outcome> {
    let text = std::fs::read_to_string(&args.universe)
        .with_context(|| format!("reading {}", args.universe.display()))?;
    let spec: SwapUniverseSpec = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", args.universe.display()))?;
    let market = synthetic_market(&spec)?;
    let mut inputs = vec![args.universe.clone()];
    let (inst, cf) = write_market(&market, &args.out_dir)?;
    let mut report = report::header("synth", &market);
    report.insert("prices".into(), vector(market.prices()));
    report.insert("cashflows".into(), report::matrix(market.cashflows()));
    report.insert(
        "written".into(),
        json!([inst.display().to_string(), cf.display().to_string()]),
    );
    if let Some(path) = &args.portfolio {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let positions: Vec<f64> = serde_json::from_str(&text)
            .with_context(|| format!("parsing portfolio {}", path.display()))?;
        let ledger = execution_schedule(&spec, &Portfolio::new(positions)?)?;
        let table = args.out_dir.join("ledger.txt");
        std::fs::write(&table, ledger.render_table())?;
        let entries: Vec<Value> = ledger
            .entries
            .iter()
            .map(|e| {
                json!({
                    "date": num(e.date),
                    "t1_repo_receipt": num(e.repo_receipt),
                    "t2_repo_reinvest": num(e.repo_reinvest),
                    "t3_floating_offset": num(e.floating_offset),
                    "t4_fixed_interest": num(e.fixed_interest),
                    "net": num(e.net),
                })
            })
            .collect();
        report.insert(
            "ledger".into(),
            json!({ "repo_investment": num(ledger.repo_investment), "entries": entries, "table": table.display().to_string() }),
        );
        inputs.push(path.clone());
    }
    Ok(Outcome {
        exit: exit::OK,
        report: Value::Object(report),
        inputs,
        lps: Vec::new(),
    })
}
