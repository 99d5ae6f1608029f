//! Daily OHLC ingestion, chronological splitting, min-max scaling and
//! next-day supervised pairs.

use std::io::Read;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OhlcRecord {
    pub date: NaiveDate,
    pub open: f64,
    pub close: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OhlcSeries {
    pub symbol: String,
    records: Vec<OhlcRecord>,
}

impl OhlcSeries {
    /// Builds a series, rejecting duplicate or out-of-order dates and
    /// non-positive prices.
    pub fn new(symbol: impl Into<String>, records: Vec<OhlcRecord>) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            if !(r.open > 0.0 && r.open.is_finite()) || !(r.close > 0.0 && r.close.is_finite()) {
                return Err(Error::InvalidPrice(i));
            }
        }
        for w in records.windows(2) {
            if w[1].date == w[0].date {
                return Err(Error::DuplicateDate(w[1].date));
            }
            if w[1].date < w[0].date {
                return Err(Error::UnorderedDates(w[1].date));
            }
        }
        Ok(OhlcSeries {
            symbol: symbol.into(),
            records,
        })
    }

    pub fn records(&self) -> &[OhlcRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn opens(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.open).collect()
    }

    pub fn closes(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.close).collect()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.records.iter().map(|r| r.date).collect()
    }
}

/// A parsed CSV together with the number of rows dropped for unparseable
/// prices.
#[derive(Debug, Clone)]
pub struct ParsedCsv {
    pub series: OhlcSeries,
    pub skipped_rows: usize,
}

fn column(headers: &csv::StringRecord, name: &'static str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case(name))
        .ok_or(Error::MissingColumn(name))
}

fn price(field: Option<&str>) -> Option<f64> {
    let v: f64 = field?.trim().parse().ok()?;
    (v.is_finite() && v > 0.0).then_some(v)
}

/// Parses a Yahoo-style daily CSV. Only `Date`, `Open` and `Close` are
/// read (case-insensitive); rows whose prices don't parse as positive
/// numbers (e.g. `null`) are skipped and counted. Records come back sorted
/// by date.
pub fn parse_csv<R: Read>(reader: R, symbol: &str) -> Result<ParsedCsv> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let date_col = column(&headers, "Date")?;
    let open_col = column(&headers, "Open")?;
    let close_col = column(&headers, "Close")?;

    let mut records = Vec::new();
    let mut skipped_rows = 0;
    for row in rdr.records() {
        let row = row?;
        if row.iter().all(|f| f.is_empty()) {
            continue;
        }
        let raw_date = row.get(date_col).unwrap_or("");
        let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d").map_err(|_| {
            Error::InvalidDate {
                line: row.position().map_or(0, |p| p.line()),
                value: raw_date.to_string(),
            }
        })?;
        match (price(row.get(open_col)), price(row.get(close_col))) {
            (Some(open), Some(close)) => records.push(OhlcRecord { date, open, close }),
            _ => skipped_rows += 1,
        }
    }
    if records.is_empty() {
        return Err(Error::NoRows);
    }
    records.sort_by_key(|r| r.date);
    Ok(ParsedCsv {
        series: OhlcSeries::new(symbol, records)?,
        skipped_rows,
    })
}

/// Reads and parses a CSV file; the symbol is taken from the file stem.
pub fn load_csv(path: &std::path::Path) -> Result<ParsedCsv> {
    let symbol = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let file = std::fs::File::open(path).map_err(|source| crate::Error::Open {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(file, &symbol)
}

/// Splits off the first `floor(n * train_fraction)` records for training.
pub fn split_chronological(
    series: &OhlcSeries,
    train_fraction: f64,
) -> Result<(OhlcSeries, OhlcSeries)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidFraction(train_fraction));
    }
    let n = series.len();
    if n < 3 {
        return Err(Error::SeriesTooShort { needed: 3, got: n });
    }
    let cut = split_index(n, train_fraction);
    if cut < 2 || cut >= n {
        return Err(Error::SeriesTooShort { needed: 3, got: n });
    }
    let (train, test) = series.records.split_at(cut);
    Ok((
        OhlcSeries {
            symbol: series.symbol.clone(),
            records: train.to_vec(),
        },
        OhlcSeries {
            symbol: series.symbol.clone(),
            records: test.to_vec(),
        },
    ))
}

/// Number of leading training records for a series of length `n`.
pub fn split_index(n: usize, train_fraction: f64) -> usize {
    (n as f64 * train_fraction).floor() as usize
}

/// Per-channel min-max constants, fitted on the training partition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub min_open: f64,
    pub max_open: f64,
    pub min_close: f64,
    pub max_close: f64,
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

pub fn fit_scaling(train: &OhlcSeries) -> Result<ScalingParams> {
    if train.is_empty() {
        return Err(Error::Empty);
    }
    let (min_open, max_open) = min_max(train.records.iter().map(|r| r.open));
    let (min_close, max_close) = min_max(train.records.iter().map(|r| r.close));
    if max_open <= min_open {
        return Err(Error::ConstantChannel("open"));
    }
    if max_close <= min_close {
        return Err(Error::ConstantChannel("close"));
    }
    Ok(ScalingParams {
        min_open,
        max_open,
        min_close,
        max_close,
    })
}

/// Min-max transform. Values outside the fitted range map outside `[0, 1]`.
pub fn normalize(value: f64, min: f64, max: f64) -> f64 {
    debug_assert!(max > min);
    (value - min) / (max - min)
}

pub fn denormalize(value: f64, min: f64, max: f64) -> f64 {
    debug_assert!(max > min);
    value * (max - min) + min
}

impl ScalingParams {
    pub fn normalize(&self, r: &OhlcRecord) -> [f64; 2] {
        [
            normalize(r.open, self.min_open, self.max_open),
            normalize(r.close, self.min_close, self.max_close),
        ]
    }

    pub fn denormalize(&self, v: [f64; 2]) -> [f64; 2] {
        [
            denormalize(v[0], self.min_open, self.max_open),
            denormalize(v[1], self.min_close, self.max_close),
        ]
    }
}

/// One supervised example: today's `[open, close]` and tomorrow's.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    pub input: [f64; 2],
    pub target: [f64; 2],
}

/// Chains consecutive days into pairs; `n` rows give `n - 1` pairs.
pub fn make_pairs(rows: &[[f64; 2]]) -> Result<Vec<Pair>> {
    if rows.len() < 2 {
        return Err(Error::SeriesTooShort {
            needed: 2,
            got: rows.len(),
        });
    }
    Ok(rows
        .windows(2)
        .map(|w| Pair {
            input: w[0],
            target: w[1],
        })
        .collect())
}

/// Normalized train/test pairs ready for training and evaluation.
///
/// Test pairs start from the last training day, so every test-partition
/// day is a forecast target exactly once and the first test forecast uses
/// only training data as input.
#[derive(Debug, Clone)]
pub struct SupervisedDataset {
    pub train_pairs: Vec<Pair>,
    pub test_pairs: Vec<Pair>,
    /// Date of each test target.
    pub test_dates: Vec<NaiveDate>,
    pub scaling: ScalingParams,
    /// Normalized `[open, close]` rows of the training partition.
    pub train_rows: Vec<[f64; 2]>,
    /// Normalized `[open, close]` rows of the test partition.
    pub test_rows: Vec<[f64; 2]>,
}

impl SupervisedDataset {
    pub fn build(series: &OhlcSeries, train_fraction: f64) -> Result<Self> {
        let (train, test) = split_chronological(series, train_fraction)?;
        let scaling = fit_scaling(&train)?;
        let train_rows: Vec<[f64; 2]> = train.records.iter().map(|r| scaling.normalize(r)).collect();
        let test_rows: Vec<[f64; 2]> = test.records.iter().map(|r| scaling.normalize(r)).collect();
        let train_pairs = make_pairs(&train_rows)?;
        let mut bridged = Vec::with_capacity(test_rows.len() + 1);
        bridged.push(*train_rows.last().expect("train partition is nonempty"));
        bridged.extend_from_slice(&test_rows);
        let test_pairs = make_pairs(&bridged)?;
        Ok(SupervisedDataset {
            train_pairs,
            test_pairs,
            test_dates: test.dates(),
            scaling,
            train_rows,
            test_rows,
        })
    }
}
