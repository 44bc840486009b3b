//! Upper records and record ages.
//!
//! Index 1 is always a record. A later index is a record only if its value
//! strictly exceeds every earlier value, so ties never count. Ages are in
//! sample steps.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::TimeSeries;

/// Whether the open age of the final record takes part in each statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CensoringPolicy {
    /// Ages feeding distribution fits. Off by default: the open age is only a
    /// lower bound on the true age.
    pub ages_include_censored: bool,
    /// Ages feeding the longest-age (block maxima) statistic. Off by
    /// default: an open age is capped by the block length, which gives the
    /// maxima a bounded tail.
    pub maxima_include_censored: bool,
}

/// Single-pass record detector. Feed values in order with [`push`].
///
/// [`push`]: RecordTracker::push
#[derive(Debug, Clone, Default)]
pub struct RecordTracker {
    len: usize,
    running_max: f64,
    last_record_time: usize,
    count: usize,
}

impl RecordTracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Consumes the next value. Returns `Some(age)` when the value is a new
    /// record that closes the previous record's age, `None` otherwise (the
    /// first observation is a record without a closed age).
    #[inline]
    pub fn push(&mut self, value: f64) -> Option<u64> {
        self.len += 1;
        if self.len == 1 {
            self.running_max = value;
            self.last_record_time = 1;
            self.count = 1;
            return None;
        }
        if value > self.running_max {
            let age = (self.len - self.last_record_time) as u64;
            self.running_max = value;
            self.last_record_time = self.len;
            self.count += 1;
            Some(age)
        } else {
            None
        }
    }

    pub fn is_record_at_last(&self) -> bool {
        self.len > 0 && self.last_record_time == self.len
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn record_count(&self) -> usize {
        self.count
    }

    pub fn last_record_time(&self) -> usize {
        self.last_record_time
    }

    /// Open age of the current record, `None` if it sits on the last sample.
    pub fn censored_age(&self) -> Option<u64> {
        let age = (self.len - self.last_record_time) as u64;
        (age > 0).then_some(age)
    }
}

/// Records of one series and the ages between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordSequence {
    /// 1-based, strictly increasing.
    pub record_times: Vec<usize>,
    pub record_values: Vec<f64>,
    pub closed_ages: Vec<u64>,
    pub censored_age: Option<u64>,
    pub series_len: usize,
}

impl RecordSequence {
    pub fn record_count(&self) -> usize {
        self.record_times.len()
    }

    /// Closed ages, followed by the censored age when requested and present.
    pub fn record_ages(&self, include_censored: bool) -> Vec<u64> {
        let mut ages = self.closed_ages.clone();
        if include_censored {
            ages.extend(self.censored_age);
        }
        ages
    }

    pub fn longest_record_age(&self, include_censored: bool) -> Result<u64> {
        let closed = self.closed_ages.iter().copied().max();
        let censored = if include_censored { self.censored_age } else { None };
        closed
            .max(censored)
            .ok_or(Error::Empty("no record ages under the censoring policy"))
    }

    /// One row per record: time, value, age and whether that age is
    /// `closed`, `censored` (open at the series end) or `none` (the record
    /// is the final sample).
    pub fn to_tsv(&self) -> String {
        let mut out = format!("# series_len={}\n", self.series_len);
        out.push_str("record_time\trecord_value\tage\tstatus\n");
        let last = self.record_times.len().saturating_sub(1);
        for (j, (t, v)) in self.record_times.iter().zip(&self.record_values).enumerate() {
            let (age, status) = if j < last {
                (self.closed_ages[j], "closed")
            } else {
                match self.censored_age {
                    Some(a) => (a, "censored"),
                    None => (0, "none"),
                }
            };
            let _ = writeln!(out, "{t}\t{v}\t{age}\t{status}");
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let bad = |line: usize, message: &str| Error::Parse {
            line,
            message: message.to_string(),
        };
        let mut series_len = None;
        let mut rs = RecordSequence {
            record_times: Vec::new(),
            record_values: Vec::new(),
            closed_ages: Vec::new(),
            censored_age: None,
            series_len: 0,
        };
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if let Some(rest) = line.strip_prefix("# series_len=") {
                series_len = Some(rest.trim().parse().map_err(|_| bad(line_no, "bad series_len"))?);
                continue;
            }
            if line.starts_with('#') || line.starts_with("record_time") || line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(bad(line_no, "expected 4 fields"));
            }
            rs.record_times
                .push(fields[0].parse().map_err(|_| bad(line_no, "bad record_time"))?);
            rs.record_values
                .push(fields[1].parse().map_err(|_| bad(line_no, "bad record_value"))?);
            let age: u64 = fields[2].parse().map_err(|_| bad(line_no, "bad age"))?;
            match fields[3] {
                "closed" => rs.closed_ages.push(age),
                "censored" => rs.censored_age = Some(age),
                "none" => {}
                _ => return Err(bad(line_no, "bad status")),
            }
        }
        rs.series_len = series_len.ok_or_else(|| bad(1, "missing series_len header"))?;
        Ok(rs)
    }
}

/// Longest record age per equal-length block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockMaxima {
    pub block_length: usize,
    pub include_censored: bool,
    /// In block order, skipped blocks left out.
    pub maxima: Vec<u64>,
    /// Blocks with no age under the censoring policy (a block whose first
    /// value is never exceeded, with censored ages excluded).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped_blocks: Vec<usize>,
}

/// Finds the upper records of `values` in one left-to-right pass.
pub fn upper_records(values: &[f64]) -> Result<RecordSequence> {
    if values.is_empty() {
        return Err(Error::Empty("record detection needs a non-empty series"));
    }
    if let Some(i) = values.iter().position(|v| v.is_nan()) {
        return Err(Error::InvalidInput(format!("NaN at index {i}")));
    }
    let mut tracker = RecordTracker::new();
    let mut rs = RecordSequence {
        record_times: Vec::new(),
        record_values: Vec::new(),
        closed_ages: Vec::new(),
        censored_age: None,
        series_len: values.len(),
    };
    for &v in values {
        let closed = tracker.push(v);
        rs.closed_ages.extend(closed);
        if tracker.is_record_at_last() {
            rs.record_times.push(tracker.len());
            rs.record_values.push(v);
        }
    }
    rs.censored_age = tracker.censored_age();
    Ok(rs)
}

pub fn find_upper_records(series: &TimeSeries) -> Result<RecordSequence> {
    upper_records(&series.values)
}

pub fn record_ages(rs: &RecordSequence, include_censored: bool) -> Vec<u64> {
    rs.record_ages(include_censored)
}

pub fn longest_record_age(rs: &RecordSequence, include_censored: bool) -> Result<u64> {
    rs.longest_record_age(include_censored)
}

pub fn record_count(rs: &RecordSequence) -> usize {
    rs.record_count()
}

/// Longest record age of every block, in block order. Records restart in
/// each block.
pub fn block_maxima(blocks: &[TimeSeries], include_censored: bool) -> Result<BlockMaxima> {
    let block_length = blocks.first().map_or(0, TimeSeries::len);
    if let Some(b) = blocks.iter().find(|b| b.len() != block_length) {
        return Err(Error::InvalidInput(format!(
            "mixed block lengths: {} and {}",
            block_length,
            b.len()
        )));
    }
    let per_block = blocks
        .par_iter()
        .map(|b| Ok(upper_records(&b.values)?.longest_record_age(include_censored).ok()))
        .collect::<Result<Vec<Option<u64>>>>()?;
    let mut maxima = Vec::with_capacity(per_block.len());
    let mut skipped_blocks = Vec::new();
    for (i, m) in per_block.into_iter().enumerate() {
        match m {
            Some(v) => maxima.push(v),
            None => skipped_blocks.push(i),
        }
    }
    Ok(BlockMaxima {
        block_length,
        include_censored,
        maxima,
        skipped_blocks,
    })
}
