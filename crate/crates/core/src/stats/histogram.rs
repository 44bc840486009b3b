//! Exact age counts and their log-binned density.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BINS_PER_DECADE: usize = 8;

/// Number of occurrences of each positive integer age.
///
/// Serialized sparsely as `[[age, count], ...]` with zero counts omitted.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(into = "Vec<(u64, u64)>", from = "Vec<(u64, u64)>")]
pub struct AgeCounts {
    counts: Vec<u64>,
}

impl AgeCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_ages(ages: &[u64]) -> Self {
        let mut c = Self::new();
        for &a in ages {
            c.add(a);
        }
        c
    }

    #[inline]
    pub fn add(&mut self, age: u64) {
        self.add_n(age, 1);
    }

    #[inline]
    pub fn add_n(&mut self, age: u64, n: u64) {
        let i = age as usize;
        if i >= self.counts.len() {
            self.counts.resize(i + 1, 0);
        }
        self.counts[i] += n;
    }

    pub fn merge(&mut self, other: &AgeCounts) {
        if other.counts.len() > self.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    /// Drops trailing zero slots so equal multisets compare equal.
    pub fn trim(&mut self) {
        while self.counts.last() == Some(&0) {
            self.counts.pop();
        }
    }

    pub fn count(&self, age: u64) -> u64 {
        self.counts.get(age as usize).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn max_age(&self) -> Option<u64> {
        self.counts.iter().rposition(|&c| c > 0).map(|i| i as u64)
    }

    pub fn min_age(&self) -> Option<u64> {
        self.counts.iter().position(|&c| c > 0).map(|i| i as u64)
    }

    /// Non-zero `(age, count)` pairs in increasing age order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(a, &c)| (a as u64, c))
    }

    /// Counts restricted to ages in `lo..=hi`.
    pub fn restrict(&self, lo: u64, hi: u64) -> AgeCounts {
        let mut out = AgeCounts::new();
        for (a, c) in self.iter().filter(|(a, _)| *a >= lo && *a <= hi) {
            out.add_n(a, c);
        }
        out
    }
}

impl From<AgeCounts> for Vec<(u64, u64)> {
    fn from(c: AgeCounts) -> Self {
        c.iter().collect()
    }
}

impl From<Vec<(u64, u64)>> for AgeCounts {
    fn from(pairs: Vec<(u64, u64)>) -> Self {
        let mut c = AgeCounts::new();
        for (a, n) in pairs {
            c.add_n(a, n);
        }
        c.trim();
        c
    }
}

/// Density of integer ages on geometrically growing bins.
///
/// Bin `i` holds the integers in `[bin_edges[i], bin_edges[i+1])`. Edges are
/// the integer ceilings of `10^(j / bins_per_decade)` with duplicates removed,
/// so every bin holds at least one integer and narrow bins near 1 merge.
/// Width is the number of integers in a bin and the center is the geometric
/// mean of the smallest and largest of them, which keeps single-integer bins
/// centred on their value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHistogram {
    pub bins_per_decade: usize,
    pub bin_edges: Vec<f64>,
    pub centers: Vec<f64>,
    pub widths: Vec<f64>,
    pub counts: Vec<u64>,
    pub density: Vec<f64>,
    pub total: u64,
}

impl LogHistogram {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    /// `sum(density * width)`; 1 up to rounding.
    pub fn mass(&self) -> f64 {
        self.density
            .iter()
            .zip(&self.widths)
            .map(|(d, w)| d * w)
            .sum()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("center\tdensity\tcount\n");
        for i in 0..self.n_bins() {
            let _ = writeln!(out, "{}\t{}\t{}", self.centers[i], self.density[i], self.counts[i]);
        }
        out
    }
}

fn integer_log_edges(max_age: u64, bins_per_decade: usize) -> Vec<u64> {
    let mut edges = vec![1u64];
    let mut j = 1i32;
    while *edges.last().unwrap() <= max_age {
        let e = 10f64.powf(j as f64 / bins_per_decade as f64).ceil() as u64;
        if e > *edges.last().unwrap() {
            edges.push(e);
        }
        j += 1;
    }
    edges
}

pub fn log_binned_histogram(ages: &[u64], bins_per_decade: usize) -> Result<LogHistogram> {
    if ages.is_empty() {
        return Err(Error::Empty("histogram of no ages"));
    }
    if ages.contains(&0) {
        return Err(Error::InvalidInput("ages must be positive".into()));
    }
    log_binned_histogram_counts(&AgeCounts::from_ages(ages), bins_per_decade)
}

pub fn log_binned_histogram_counts(
    counts: &AgeCounts,
    bins_per_decade: usize,
) -> Result<LogHistogram> {
    if bins_per_decade == 0 {
        return Err(Error::InvalidInput("bins_per_decade must be >= 1".into()));
    }
    if counts.count(0) > 0 {
        return Err(Error::InvalidInput("ages must be positive".into()));
    }
    let max_age = counts.max_age().ok_or(Error::Empty("histogram of no ages"))?;
    let edges = integer_log_edges(max_age, bins_per_decade);
    let n_bins = edges.len() - 1;
    let mut bin_counts = vec![0u64; n_bins];
    let mut bin = 0;
    for (age, c) in counts.iter() {
        while age >= edges[bin + 1] {
            bin += 1;
        }
        bin_counts[bin] += c;
    }
    let total: u64 = bin_counts.iter().sum();
    let widths: Vec<f64> = edges.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
    let centers = edges
        .windows(2)
        .map(|w| ((w[0] as f64) * ((w[1] - 1) as f64)).sqrt())
        .collect();
    let density = bin_counts
        .iter()
        .zip(&widths)
        .map(|(&c, w)| c as f64 / (total as f64 * w))
        .collect();
    Ok(LogHistogram {
        bins_per_decade,
        bin_edges: edges.iter().map(|&e| e as f64).collect(),
        centers,
        widths,
        counts: bin_counts,
        density,
        total,
    })
}
