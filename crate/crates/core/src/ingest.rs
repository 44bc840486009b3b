//! Daily price ingestion, log-returns and windowing.
//!
//! The CSV layout follows the common Yahoo-style export: a header row with a
//! `Date` column (ISO `yyyy-mm-dd`) and `Close` / `Adj Close` price columns.
//! Any further columns are ignored.

use std::collections::HashSet;
use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DATE_COLUMN: &str = "Date";
pub const CLOSE_COLUMN: &str = "Close";
pub const ADJ_CLOSE_COLUMN: &str = "Adj Close";

/// Which price column feeds the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnPolicy {
    /// Close corrected for splits and dividends.
    #[default]
    AdjustedClose,
    Close,
}

impl ColumnPolicy {
    pub fn column_name(self) -> &'static str {
        match self {
            ColumnPolicy::AdjustedClose => ADJ_CLOSE_COLUMN,
            ColumnPolicy::Close => CLOSE_COLUMN,
        }
    }
}

/// An ordered series of observations, optionally dated.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub values: Vec<f64>,
    pub dates: Option<Vec<NaiveDate>>,
    pub label: String,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Self {
        Self {
            values,
            dates: None,
            label: String::new(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Attaches dates, which must match the values in length and be
    /// strictly increasing.
    pub fn with_dates(mut self, dates: Vec<NaiveDate>) -> Result<Self> {
        if dates.len() != self.values.len() {
            return Err(Error::InvalidInput(format!(
                "{} dates for {} values",
                dates.len(),
                self.values.len()
            )));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("dates must be strictly increasing".into()));
        }
        self.dates = Some(dates);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn ensure_positive(&self) -> Result<()> {
        match self.values.iter().position(|v| !(*v > 0.0)) {
            Some(index) => Err(Error::NonPositive {
                index,
                value: self.values[index],
            }),
            None => Ok(()),
        }
    }
}

/// Per-series log-return statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnStats {
    pub mu: f64,
    pub sigma: f64,
    pub n_returns: usize,
}

/// Reads a daily price table.
///
/// Rows may come in either chronological order; the result is sorted by
/// date. Line numbers in errors are 1-based and count the header row.
pub fn parse_daily_csv<R: Read>(source: R, column_policy: ColumnPolicy) -> Result<TimeSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let headers = reader.headers()?.clone();
    let n_fields = headers.len();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let date_col = find(DATE_COLUMN)?;
    let price_col = find(column_policy.column_name())?;

    let mut rows: Vec<(NaiveDate, f64, usize)> = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(err) => {
                let line = err.position().map(|p| p.line() as usize).unwrap_or(0);
                return Err(Error::Parse {
                    line,
                    message: err.to_string(),
                });
            }
        }
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != n_fields {
            return Err(Error::Parse {
                line,
                message: format!("expected {n_fields} fields, found {}", record.len()),
            });
        }
        let date = NaiveDate::parse_from_str(&record[date_col], "%Y-%m-%d").map_err(|e| {
            Error::Parse {
                line,
                message: format!("invalid date {:?}: {e}", &record[date_col]),
            }
        })?;
        let price: f64 = record[price_col].parse().map_err(|_| Error::Parse {
            line,
            message: format!("invalid price {:?}", &record[price_col]),
        })?;
        if !(price > 0.0) || !price.is_finite() {
            return Err(Error::Parse {
                line,
                message: format!("price must be positive and finite, got {price}"),
            });
        }
        rows.push((date, price, line));
    }

    let mut seen = HashSet::with_capacity(rows.len());
    for (date, _, line) in &rows {
        if !seen.insert(*date) {
            return Err(Error::DuplicateDate {
                line: *line,
                date: date.to_string(),
            });
        }
    }
    rows.sort_by_key(|(date, _, _)| *date);

    Ok(TimeSeries {
        values: rows.iter().map(|r| r.1).collect(),
        dates: Some(rows.iter().map(|r| r.0).collect()),
        label: String::new(),
    })
}

/// Writes a series as a two-column `Date,<price column>` table that
/// [`parse_daily_csv`] reads back unchanged.
pub fn write_daily_csv<W: Write>(
    series: &TimeSeries,
    column_policy: ColumnPolicy,
    sink: W,
) -> Result<()> {
    let dates = series
        .dates
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("series has no dates".into()))?;
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record([DATE_COLUMN, column_policy.column_name()])?;
    for (date, value) in dates.iter().zip(&series.values) {
        writer.write_record([date.format("%Y-%m-%d").to_string(), value.to_string()])?;
    }
    writer.flush()?;
    Ok(())
}

/// Natural-log returns `ln(v[i+1] / v[i])`.
pub fn log_returns(series: &TimeSeries) -> Result<Vec<f64>> {
    if series.len() < 2 {
        return Err(Error::InvalidInput("log-returns need at least 2 values".into()));
    }
    series.ensure_positive()?;
    Ok(series
        .values
        .windows(2)
        .map(|w| (w[1] / w[0]).ln())
        .collect())
}

/// Sample mean and unbiased standard deviation of the log-returns.
pub fn estimate_params(series: &TimeSeries) -> Result<ReturnStats> {
    if series.len() < 3 {
        return Err(Error::InvalidInput(
            "parameter estimation needs at least 3 values".into(),
        ));
    }
    let returns = log_returns(series)?;
    let n = returns.len() as f64;
    let mu = returns.iter().sum::<f64>() / n;
    let ss: f64 = returns.iter().map(|r| (r - mu) * (r - mu)).sum();
    Ok(ReturnStats {
        mu,
        sigma: (ss / (n - 1.0)).sqrt(),
        n_returns: returns.len(),
    })
}

/// Unweighted average of per-series statistics.
///
/// `n_returns` of the result is the total over all inputs.
pub fn portfolio_mean_params(stats_list: &[ReturnStats]) -> Result<ReturnStats> {
    if stats_list.is_empty() {
        return Err(Error::Empty("no return statistics to average"));
    }
    let n = stats_list.len() as f64;
    Ok(ReturnStats {
        mu: stats_list.iter().map(|s| s.mu).sum::<f64>() / n,
        sigma: stats_list.iter().map(|s| s.sigma).sum::<f64>() / n,
        n_returns: stats_list.iter().map(|s| s.n_returns).sum(),
    })
}

/// Splits a series into consecutive non-overlapping blocks of exactly `len`
/// values. A trailing remainder shorter than `len` is dropped.
pub fn window(series: &TimeSeries, len: usize) -> Result<Vec<TimeSeries>> {
    if len < 2 {
        return Err(Error::InvalidInput(format!("window length {len} < 2")));
    }
    let blocks = series
        .values
        .chunks_exact(len)
        .enumerate()
        .map(|(i, chunk)| TimeSeries {
            values: chunk.to_vec(),
            dates: series
                .dates
                .as_ref()
                .map(|d| d[i * len..(i + 1) * len].to_vec()),
            label: format!("{}#{}", series.label, i),
        })
        .collect();
    Ok(blocks)
}
