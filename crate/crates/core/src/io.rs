//! CSV and JSON input/output.
//!
//! * `instruments.csv`: `id,price`
//! * `cashflows.csv`: `id,date,amount` (long format; absent pairs are zero)
//! * `liabilities.csv`: `date,amount`
//! * curve JSON: `{"knot_times":[…],"knot_values":[…],"long_end_yield":r}`
//!
//! Headers must match exactly. Repeated `(id, date)` pairs are summed. The
//! grid is the union of all cash-flow and liability dates, merged within
//! [`DATE_MATCH_TOL`].

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::curve::DiscountCurve;
use crate::error::{Error, Result};
use crate::market::{DateGrid, LiabilitySchedule, Market, DATE_MATCH_TOL};

pub const INSTRUMENTS_HEADER: [&str; 2] = ["id", "price"];
pub const CASHFLOWS_HEADER: [&str; 3] = ["id", "date", "amount"];
pub const LIABILITIES_HEADER: [&str; 2] = ["date", "amount"];

/// One data row of a CSV file with its 1-based line number.
#[derive(Debug, Clone, PartialEq)]
pub struct Row<T> {
    pub line: u64,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CashflowRecord {
    pub id: String,
    pub date: f64,
    pub amount: f64,
}

fn parse_err(path: &str, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

fn read_table<R: Read>(
    reader: R,
    path: &str,
    expected: &[&str],
) -> Result<Vec<Row<csv::StringRecord>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader);
    let csv_err = |e: csv::Error| {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        parse_err(path, line, e.to_string())
    };
    let header = rdr.headers().map_err(csv_err)?.clone();
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(parse_err(
            path,
            1,
            format!(
                "expected header `{}`, found `{}`",
                expected.join(","),
                got.join(",")
            ),
        ));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        rows.push(Row { line, value: rec });
    }
    Ok(rows)
}

fn number(path: &str, line: u64, column: &str, field: &str) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| {
        parse_err(
            path,
            line,
            format!("column `{column}`: `{field}` is not a number"),
        )
    })?;
    if !v.is_finite() {
        return Err(parse_err(
            path,
            line,
            format!("column `{column}`: value must be finite"),
        ));
    }
    Ok(v)
}

fn date(path: &str, line: u64, field: &str) -> Result<f64> {
    let d = number(path, line, "date", field)?;
    if d <= 0.0 {
        return Err(parse_err(path, line, format!("date {d} must be positive")));
    }
    Ok(d)
}

fn identifier(path: &str, line: u64, field: &str) -> Result<String> {
    if field.is_empty() {
        return Err(parse_err(path, line, "empty instrument id"));
    }
    Ok(field.to_string())
}

pub fn parse_instruments<R: Read>(reader: R, path: &str) -> Result<Vec<Row<(String, f64)>>> {
    let mut seen = HashMap::new();
    read_table(reader, path, &INSTRUMENTS_HEADER)?
        .into_iter()
        .map(|Row { line, value }| {
            let id = identifier(path, line, &value[0])?;
            let price = number(path, line, "price", &value[1])?;
            if let Some(first) = seen.insert(id.clone(), line) {
                return Err(parse_err(
                    path,
                    line,
                    format!("duplicate id `{id}` (first on line {first})"),
                ));
            }
            Ok(Row {
                line,
                value: (id, price),
            })
        })
        .collect()
}

pub fn parse_cashflows<R: Read>(reader: R, path: &str) -> Result<Vec<Row<CashflowRecord>>> {
    read_table(reader, path, &CASHFLOWS_HEADER)?
        .into_iter()
        .map(|Row { line, value }| {
            Ok(Row {
                line,
                value: CashflowRecord {
                    id: identifier(path, line, &value[0])?,
                    date: date(path, line, &value[1])?,
                    amount: number(path, line, "amount", &value[2])?,
                },
            })
        })
        .collect()
}

pub fn parse_liabilities<R: Read>(reader: R, path: &str) -> Result<Vec<Row<(f64, f64)>>> {
    read_table(reader, path, &LIABILITIES_HEADER)?
        .into_iter()
        .map(|Row { line, value }| {
            Ok(Row {
                line,
                value: (
                    date(path, line, &value[0])?,
                    number(path, line, "amount", &value[1])?,
                ),
            })
        })
        .collect()
}

/// Sorted union of `dates`, merging neighbours closer than
/// [`DATE_MATCH_TOL`] (the first representative is kept).
fn union_grid(dates: impl Iterator<Item = f64>) -> Result<DateGrid> {
    let mut all: Vec<f64> = dates.collect();
    all.sort_by(|a, b| a.partial_cmp(b).expect("dates are finite"));
    let mut merged: Vec<f64> = Vec::with_capacity(all.len());
    for d in all {
        match merged.last() {
            Some(&last) if d - last <= DATE_MATCH_TOL => {}
            _ => merged.push(d),
        }
    }
    DateGrid::new(merged)
}

/// Build a market (and, if given, a liability schedule on the same grid)
/// from parsed rows.
pub fn assemble(
    instruments: &[Row<(String, f64)>],
    cashflows_path: &str,
    cashflows: &[Row<CashflowRecord>],
    liabilities: Option<&[Row<(f64, f64)>]>,
) -> Result<(Market, Option<LiabilitySchedule>)> {
    if instruments.is_empty() {
        return Err(parse_err(cashflows_path, 0, "no instruments"));
    }
    let index: HashMap<&str, usize> = instruments
        .iter()
        .enumerate()
        .map(|(i, r)| (r.value.0.as_str(), i))
        .collect();
    for r in cashflows {
        if !index.contains_key(r.value.id.as_str()) {
            return Err(parse_err(
                cashflows_path,
                r.line,
                format!("unknown instrument id `{}`", r.value.id),
            ));
        }
    }
    let liab_dates = liabilities.into_iter().flatten().map(|r| r.value.0);
    let grid = union_grid(cashflows.iter().map(|r| r.value.date).chain(liab_dates))
        .map_err(|e| parse_err(cashflows_path, 0, e.to_string()))?;

    let (m, n) = (instruments.len(), grid.len());
    let mut c = DMatrix::zeros(m, n);
    let mut first_line: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for r in cashflows {
        let i = index[r.value.id.as_str()];
        let j = grid
            .position(r.value.date)
            .expect("date is on the union grid");
        if let Some(prev) = first_line.insert((i, j), r.line) {
            log::info!(
                "{cashflows_path}:{}: summing repeated cash flow for `{}` at {} (first on line {prev})",
                r.line,
                r.value.id,
                grid.dates()[j]
            );
        }
        c[(i, j)] += r.value.amount;
    }
    let prices = DVector::from_iterator(m, instruments.iter().map(|r| r.value.1));
    let ids = instruments.iter().map(|r| r.value.0.clone()).collect();
    let schedule = liabilities
        .map(|rows| {
            let mut z = vec![0.0; n];
            for r in rows {
                z[grid.position(r.value.0).expect("date is on the union grid")] += r.value.1;
            }
            LiabilitySchedule::new(grid.clone(), z)
        })
        .transpose()?;
    Ok((Market::with_ids(grid, prices, c, ids)?, schedule))
}

fn open(path: &Path) -> Result<File> {
    Ok(File::open(path)?)
}

fn name(path: &Path) -> String {
    path.display().to_string()
}

pub fn load_market(instruments: &Path, cashflows: &Path) -> Result<Market> {
    let inst = parse_instruments(open(instruments)?, &name(instruments))?;
    let cf = parse_cashflows(open(cashflows)?, &name(cashflows))?;
    Ok(assemble(&inst, &name(cashflows), &cf, None)?.0)
}

/// Load a market and a liability schedule; liability dates join the grid.
pub fn load_market_with_liabilities(
    instruments: &Path,
    cashflows: &Path,
    liabilities: &Path,
) -> Result<(Market, LiabilitySchedule)> {
    let inst = parse_instruments(open(instruments)?, &name(instruments))?;
    let cf = parse_cashflows(open(cashflows)?, &name(cashflows))?;
    let liab = parse_liabilities(open(liabilities)?, &name(liabilities))?;
    let (market, schedule) = assemble(&inst, &name(cashflows), &cf, Some(&liab))?;
    Ok((market, schedule.expect("liabilities were supplied")))
}

/// Parse a market from in-memory CSV text.
pub fn market_from_str(instruments: &str, cashflows: &str) -> Result<Market> {
    let inst = parse_instruments(instruments.as_bytes(), "instruments.csv")?;
    let cf = parse_cashflows(cashflows.as_bytes(), "cashflows.csv")?;
    Ok(assemble(&inst, "cashflows.csv", &cf, None)?.0)
}

pub fn curve_from_json(text: &str) -> Result<DiscountCurve> {
    Ok(serde_json::from_str(text)?)
}

pub fn load_curve(path: &Path) -> Result<DiscountCurve> {
    let mut text = String::new();
    open(path)?.read_to_string(&mut text)?;
    curve_from_json(&text)
}

fn csv_write<W: Write>(
    w: W,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    wtr.write_record(header).map_err(io)?;
    for r in rows {
        wtr.write_record(&r).map_err(io)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_instruments<W: Write>(market: &Market, w: W) -> Result<()> {
    let rows = market
        .ids()
        .iter()
        .zip(market.prices().iter())
        .map(|(id, p)| vec![id.clone(), p.to_string()]);
    csv_write(w, &INSTRUMENTS_HEADER, rows)
}

/// Nonzero entries in row-major order. A date whose column is entirely
/// zero is still written (as a zero for the first instrument) so that the
/// grid survives a round trip.
pub fn write_cashflows<W: Write>(market: &Market, w: W) -> Result<()> {
    let c = market.cashflows();
    let dates = market.grid().dates();
    let mut rows = Vec::new();
    for (i, id) in market.ids().iter().enumerate() {
        for (j, &x) in dates.iter().enumerate() {
            let empty_column = i == 0 && c.column(j).iter().all(|&v| v == 0.0);
            if c[(i, j)] != 0.0 || empty_column {
                rows.push(vec![id.clone(), x.to_string(), c[(i, j)].to_string()]);
            }
        }
    }
    csv_write(w, &CASHFLOWS_HEADER, rows.into_iter())
}

pub fn write_liabilities<W: Write>(liab: &LiabilitySchedule, w: W) -> Result<()> {
    let rows = liab
        .grid()
        .dates()
        .iter()
        .zip(liab.amounts().iter())
        .map(|(d, z)| vec![d.to_string(), z.to_string()]);
    csv_write(w, &LIABILITIES_HEADER, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    const INST: &str = "id,price\nA,1\nB,0.05\n";
    const CF: &str = "id,date,amount\nA,1,1\nB,1,0.05\nB,2,1\n";

    fn line_of(err: Error) -> u64 {
        match err {
            Error::Parse { line, .. } => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parses_example_market() {
        let m = market_from_str(INST, CF).unwrap();
        assert_eq!(m.grid().dates(), &[1.0, 2.0]);
        assert_eq!(m.cashflows().as_slice(), &[1.0, 0.05, 0.0, 1.0]);
        assert_eq!(m.ids(), &["A".to_string(), "B".to_string()]);
    }

    #[test]
    fn unknown_id_is_rejected_with_line() {
        let err = market_from_str(INST, "id,date,amount\nA,1,1\nZ,2,1\n").unwrap_err();
        assert_eq!(line_of(err), 3);
    }

    #[test]
    fn strict_headers() {
        assert_eq!(
            line_of(market_from_str("id,price,extra\nA,1,2\n", CF).unwrap_err()),
            1
        );
        assert_eq!(
            line_of(market_from_str("price,id\n1,A\n", CF).unwrap_err()),
            1
        );
    }

    #[test]
    fn malformed_rows() {
        assert_eq!(
            line_of(market_from_str("id,price\nA,x\n", CF).unwrap_err()),
            2
        );
        assert_eq!(
            line_of(market_from_str("id,price\nA,1\nB\n", CF).unwrap_err()),
            3
        );
        assert_eq!(
            line_of(market_from_str(INST, "id,date,amount\nA,-1,1\n").unwrap_err()),
            2
        );
        assert_eq!(
            line_of(market_from_str(INST, "id,date,amount\nA,1,nan\n").unwrap_err()),
            2
        );
        assert_eq!(
            line_of(market_from_str("id,price\nA,1\nA,2\n", CF).unwrap_err()),
            3
        );
    }

    #[test]
    fn duplicates_are_summed_and_dates_merged() {
        let m = market_from_str(
            "id,price\nA,1\n",
            "id,date,amount\nA,1,0.5\nA,1.0000000001,0.5\nA,2,1\n",
        )
        .unwrap();
        assert_eq!(m.grid().len(), 2);
        assert_eq!(m.cashflows().as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn zero_rows_are_kept() {
        let m = market_from_str("id,price\nA,1\nB,0.3\n", "id,date,amount\nA,1,1\n").unwrap();
        assert_eq!(m.n_instruments(), 2);
        assert_eq!(m.cashflows().row(1).amax(), 0.0);
    }

    #[test]
    fn liability_dates_join_the_grid() {
        let inst = parse_instruments(INST.as_bytes(), "i").unwrap();
        let cf = parse_cashflows(CF.as_bytes(), "c").unwrap();
        let liab = parse_liabilities("date,amount\n1.5,2\n2,1\n".as_bytes(), "l").unwrap();
        let (m, z) = assemble(&inst, "c", &cf, Some(&liab)).unwrap();
        assert_eq!(m.grid().dates(), &[1.0, 1.5, 2.0]);
        assert_eq!(z.unwrap().amounts().as_slice(), &[0.0, 2.0, 1.0]);
        assert_eq!(m.cashflows().column(1).amax(), 0.0);
    }

    #[test]
    fn round_trip() {
        let m = Market::from_rows(
            vec![0.5, 1.0, 1.5],
            vec![0.1 + 0.2, 1.0 / 3.0],
            vec![vec![1e-17, 0.0, 0.0], vec![0.0, 0.0, 2.0 / 7.0]],
        )
        .unwrap();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_instruments(&m, &mut a).unwrap();
        write_cashflows(&m, &mut b).unwrap();
        let back = market_from_str(
            std::str::from_utf8(&a).unwrap(),
            std::str::from_utf8(&b).unwrap(),
        )
        .unwrap();
        assert_eq!(back, m);

        let z = LiabilitySchedule::for_market(&m, vec![0.0, 1.25, 0.0]).unwrap();
        let mut l = Vec::new();
        write_liabilities(&z, &mut l).unwrap();
        let rows = parse_liabilities(l.as_slice(), "l").unwrap();
        assert_eq!(
            rows.iter().map(|r| r.value.1).collect::<Vec<_>>(),
            vec![0.0, 1.25, 0.0]
        );
    }

    #[test]
    fn curve_json() {
        let g =
            curve_from_json(r#"{"knot_times":[0,1],"knot_values":[1,0.95],"long_end_yield":0.1}"#)
                .unwrap();
        assert_eq!(g.knot_values(), &[1.0, 0.95]);
        assert!(curve_from_json(r#"{"knot_times":[0,1],"knot_values":[1,0.95],"x":1}"#).is_err());
    }
}
