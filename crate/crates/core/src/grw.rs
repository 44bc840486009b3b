//! Geometric random walk `y[i+1] = y[i] * exp(xi[i])` with Gaussian
//! increments, singly or as reproducible ensembles.
//!
//! Ensembles never store whole paths. Each realization is fed through a
//! [`RecordTracker`] as it is generated and only the requested statistics
//! are kept.
//!
//! # Reproducibility
//!
//! Realization `j` of an ensemble is generated from its own seed,
//! [`realization_seed`]`(master_seed, j)`, so any realization can be re-run
//! on its own with [`simulate`]. Per-realization results are merged with
//! integer addition and sorted by index, which makes the summary independent
//! of worker count and scheduling.

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::TimeSeries;
use crate::records::{upper_records, CensoringPolicy, RecordSequence, RecordTracker};
use crate::stats::histogram::{log_binned_histogram_counts, AgeCounts, LogHistogram};

pub const RNG_NAME: &str = "xoshiro256++ (rand_xoshiro 0.6), state filled by SplitMix64";
pub const GAUSSIAN_METHOD: &str = "ziggurat (rand_distr 0.4 StandardNormal)";
pub const SEED_DERIVATION: &str = "seed_j = splitmix64(master_seed ^ splitmix64(j))";
pub const SUMMARY_FORMAT: &str = "recordlab-ensemble/1";

/// Per-step Gaussian increment parameters, series length and start value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrwParams {
    pub mu: f64,
    pub sigma: f64,
    pub n_steps: usize,
    pub y0: f64,
}

impl GrwParams {
    pub fn new(mu: f64, sigma: f64, n_steps: usize) -> Self {
        Self {
            mu,
            sigma,
            n_steps,
            y0: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(Error::InvalidInput(format!("mu = {} is not finite", self.mu)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidInput(format!("sigma = {} must be > 0", self.sigma)));
        }
        if self.n_steps < 2 {
            return Err(Error::InvalidInput(format!(
                "n_steps = {} must be >= 2",
                self.n_steps
            )));
        }
        if !(self.y0 > 0.0 && self.y0.is_finite()) {
            return Err(Error::InvalidInput(format!("y0 = {} must be > 0", self.y0)));
        }
        Ok(())
    }
}

/// Source of the log-increments.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncrementModel {
    /// Independent draws from Gaussian(mu, sigma).
    #[default]
    Gaussian,
    /// Every increment equals the given constant; `mu` and `sigma` are
    /// ignored. Deterministic limit used for checks.
    Constant(f64),
}

/// SplitMix64 output function: a bijection on `u64` with full avalanche.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of realization `index`. Injective in `index` for a fixed master
/// seed because both mixing steps are bijections.
pub fn realization_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index))
}

/// Generates one path, handing each value to `visit` in order.
fn walk(
    params: &GrwParams,
    model: IncrementModel,
    seed: u64,
    realization: u64,
    mut visit: impl FnMut(f64),
) -> Result<()> {
    params.validate()?;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let normal = Normal::new(params.mu, params.sigma)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut y = params.y0;
    visit(y);
    for step in 1..params.n_steps {
        let xi = match model {
            IncrementModel::Gaussian => normal.sample(&mut rng),
            IncrementModel::Constant(c) => c,
        };
        y *= xi.exp();
        if !(y.is_finite() && y > 0.0) {
            return Err(Error::Overflow { realization, step });
        }
        visit(y);
    }
    Ok(())
}

/// Simulates one path of length `n_steps` starting at `y0`. Identical seed
/// and parameters give bit-identical output.
pub fn simulate(params: &GrwParams, seed: u64) -> Result<TimeSeries> {
    simulate_with_model(params, IncrementModel::Gaussian, seed)
}

pub fn simulate_with_model(
    params: &GrwParams,
    model: IncrementModel,
    seed: u64,
) -> Result<TimeSeries> {
    let mut values = Vec::with_capacity(params.n_steps);
    walk(params, model, seed, 0, |y| values.push(y))?;
    Ok(TimeSeries::new(values))
}

/// Builds a path from explicit increments; the result has
/// `increments.len() + 1` values.
pub fn path_from_increments(y0: f64, increments: &[f64]) -> Result<TimeSeries> {
    if !(y0 > 0.0 && y0.is_finite()) {
        return Err(Error::InvalidInput(format!("y0 = {y0} must be > 0")));
    }
    let mut values = Vec::with_capacity(increments.len() + 1);
    let mut y = y0;
    values.push(y);
    for (i, xi) in increments.iter().enumerate() {
        y *= xi.exp();
        if !(y.is_finite() && y > 0.0) {
            return Err(Error::Overflow {
                realization: 0,
                step: i + 1,
            });
        }
        values.push(y);
    }
    Ok(TimeSeries::new(values))
}

/// Statistics to gather from every realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Collectors {
    /// Histogram of all record ages, pooled over realizations.
    pub pooled_ages: bool,
    /// Longest record age of each realization.
    pub longest_age: bool,
    /// Number of records of each realization.
    pub record_count: bool,
}

impl Collectors {
    pub fn all() -> Self {
        Self {
            pooled_ages: true,
            longest_age: true,
            record_count: true,
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.pooled_ages || self.longest_age || self.record_count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub params: GrwParams,
    pub n_realizations: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub model: IncrementModel,
    #[serde(default)]
    pub censoring: CensoringPolicy,
    /// Resolution of the log-binned age histogram in the summary.
    pub bins_per_decade: usize,
}

impl EnsembleSpec {
    pub fn new(params: GrwParams, n_realizations: usize, master_seed: u64) -> Self {
        Self {
            params,
            n_realizations,
            master_seed,
            model: IncrementModel::Gaussian,
            censoring: CensoringPolicy::default(),
            bins_per_decade: crate::stats::histogram::DEFAULT_BINS_PER_DECADE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_realizations == 0 {
            return Err(Error::InvalidInput("ensemble needs at least 1 realization".into()));
        }
        if self.bins_per_decade == 0 {
            return Err(Error::InvalidInput("bins_per_decade must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RngInfo {
    pub generator: String,
    pub gaussian: String,
    pub seed_derivation: String,
}

impl Default for RngInfo {
    fn default() -> Self {
        Self {
            generator: RNG_NAME.into(),
            gaussian: GAUSSIAN_METHOD.into(),
            seed_derivation: SEED_DERIVATION.into(),
        }
    }
}

/// What one realization contributes besides pooled ages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizationStats {
    pub index: u64,
    /// `None` when the longest-age collector is off or no age exists under
    /// the censoring policy.
    pub r_max: Option<u64>,
    pub record_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub format: String,
    pub spec: EnsembleSpec,
    pub rng: RngInfo,
    pub collectors: Collectors,
    pub age_histogram: Option<LogHistogram>,
    pub age_counts: Option<AgeCounts>,
    pub realizations: Vec<RealizationStats>,
}

impl EnsembleSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    /// Longest ages of all realizations that have one, in index order.
    pub fn longest_ages(&self) -> Vec<u64> {
        self.realizations.iter().filter_map(|r| r.r_max).collect()
    }

    pub fn record_counts(&self) -> Vec<usize> {
        self.realizations.iter().filter_map(|r| r.record_count).collect()
    }

    pub fn mean_record_count(&self) -> Option<f64> {
        let counts = self.record_counts();
        (!counts.is_empty())
            .then(|| counts.iter().map(|&c| c as f64).sum::<f64>() / counts.len() as f64)
    }

    pub fn mean_longest_age(&self) -> Option<f64> {
        let ages = self.longest_ages();
        (!ages.is_empty()).then(|| ages.iter().map(|&c| c as f64).sum::<f64>() / ages.len() as f64)
    }
}

/// Runs realization `index` of an ensemble on its own and returns its
/// records.
pub fn run_realization(spec: &EnsembleSpec, index: u64) -> Result<RecordSequence> {
    let seed = realization_seed(spec.master_seed, index);
    let series = simulate_with_model(&spec.params, spec.model, seed)?;
    upper_records(&series.values)
}

#[derive(Default)]
struct Partial {
    ages: AgeCounts,
    rows: Vec<RealizationStats>,
    first_error: Option<(u64, Error)>,
}

impl Partial {
    fn merge(mut self, other: Partial) -> Partial {
        self.ages.merge(&other.ages);
        self.rows.extend(other.rows);
        self.first_error = match (self.first_error, other.first_error) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
        self
    }
}

fn run_one(spec: &EnsembleSpec, collectors: Collectors, index: u64, acc: &mut Partial) {
    let seed = realization_seed(spec.master_seed, index);
    let mut tracker = RecordTracker::new();
    let mut longest_closed = 0u64;
    let ages = &mut acc.ages;
    let pooled = collectors.pooled_ages;
    let outcome = walk(&spec.params, spec.model, seed, index, |y| {
        if let Some(age) = tracker.push(y) {
            longest_closed = longest_closed.max(age);
            if pooled {
                ages.add(age);
            }
        }
    });
    if let Err(err) = outcome {
        if acc.first_error.as_ref().is_none_or(|(i, _)| index < *i) {
            acc.first_error = Some((index, err));
        }
        return;
    }
    let censored = tracker.censored_age();
    if pooled && spec.censoring.ages_include_censored {
        if let Some(age) = censored {
            ages.add(age);
        }
    }
    let r_max = collectors.longest_age.then(|| {
        let open = if spec.censoring.maxima_include_censored {
            censored.unwrap_or(0)
        } else {
            0
        };
        Some(longest_closed.max(open)).filter(|&m| m > 0)
    });
    acc.rows.push(RealizationStats {
        index,
        r_max: r_max.flatten(),
        record_count: collectors.record_count.then(|| tracker.record_count()),
    });
}

/// Runs `spec.n_realizations` independent walks on up to `workers` threads
/// and gathers the requested statistics.
pub fn run_ensemble(
    spec: &EnsembleSpec,
    collectors: Collectors,
    workers: usize,
) -> Result<EnsembleSummary> {
    spec.validate()?;
    if collectors.is_empty() {
        return Err(Error::InvalidInput("no statistic collectors requested".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let m = spec.n_realizations as u64;
    let partial = pool.install(|| {
        (0..m)
            .into_par_iter()
            .fold(Partial::default, |mut acc, j| {
                run_one(spec, collectors, j, &mut acc);
                acc
            })
            .reduce(Partial::default, Partial::merge)
    });
    if let Some((_, err)) = partial.first_error {
        return Err(err);
    }
    let mut rows = partial.rows;
    rows.sort_unstable_by_key(|r| r.index);

    let (age_counts, age_histogram) = if collectors.pooled_ages {
        let mut counts = partial.ages;
        counts.trim();
        let hist = if counts.total() > 0 {
            Some(log_binned_histogram_counts(&counts, spec.bins_per_decade)?)
        } else {
            None
        };
        (Some(counts), hist)
    } else {
        (None, None)
    };

    Ok(EnsembleSummary {
        format: SUMMARY_FORMAT.into(),
        spec: spec.clone(),
        rng: RngInfo::default(),
        collectors,
        age_histogram,
        age_counts,
        realizations: rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_increments_are_exact_exponentials() {
        let p = GrwParams {
            mu: 0.01,
            sigma: 0.015,
            n_steps: 50,
            y0: 2.0,
        };
        let ts = simulate_with_model(&p, IncrementModel::Constant(p.mu), 1).unwrap();
        assert_eq!(ts.len(), 50);
        assert_eq!(ts.values[0], 2.0);
        // Repeated multiplication by exp(mu) is compared to the closed form
        // at relative precision; equality of each step ratio is exact.
        for (i, v) in ts.values.iter().enumerate() {
            let expect = 2.0 * ((i as f64) * p.mu).exp();
            assert!((v - expect).abs() <= 1e-13 * expect, "{i}: {v} vs {expect}");
        }
        let step = p.mu.exp();
        for w in ts.values.windows(2) {
            assert_eq!(w[1], w[0] * step);
        }
    }

    #[test]
    fn same_seed_same_path() {
        let p = GrwParams::new(0.00031, 0.015, 1000);
        assert_eq!(simulate(&p, 7).unwrap(), simulate(&p, 7).unwrap());
        assert_ne!(simulate(&p, 7).unwrap(), simulate(&p, 8).unwrap());
    }

    #[test]
    fn invalid_params() {
        assert!(simulate(&GrwParams::new(0.0, 0.0, 10), 1).is_err());
        assert!(simulate(&GrwParams::new(0.0, 0.1, 1), 1).is_err());
        let mut p = GrwParams::new(0.0, 0.1, 10);
        p.y0 = -1.0;
        assert!(simulate(&p, 1).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let p = GrwParams::new(0.0, 0.1, 100);
        let err = simulate_with_model(&p, IncrementModel::Constant(50.0), 1).unwrap_err();
        assert!(matches!(err, Error::Overflow { step, .. } if step > 1 && step < 100));
    }

    #[test]
    fn path_from_increments_matches_log_differences() {
        let inc = [0.1, -0.2, 0.05];
        let ts = path_from_increments(1.0, &inc).unwrap();
        assert_eq!(ts.len(), 4);
        for (i, xi) in inc.iter().enumerate() {
            let d = ts.values[i + 1].ln() - ts.values[i].ln();
            assert!((d - xi).abs() < 1e-15);
        }
    }

    #[test]
    fn seeds_are_distinct() {
        let mut seeds: Vec<u64> = (0..10_000).map(|j| realization_seed(42, j)).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 10_000);
    }

    #[test]
    fn zero_collectors_rejected() {
        let spec = EnsembleSpec::new(GrwParams::new(0.0, 0.01, 10), 2, 1);
        assert!(run_ensemble(&spec, Collectors::default(), 1).is_err());
        let mut bad = spec.clone();
        bad.n_realizations = 0;
        assert!(run_ensemble(&bad, Collectors::all(), 1).is_err());
    }
}
