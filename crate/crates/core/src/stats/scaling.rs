//! How record statistics change with series length `N`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::gev::{fit_gev, frechet_mean};
use super::regression::{linear_fit, pearson, LinearFit};
use crate::error::{Error, Result};
use crate::grw::{realization_seed, run_ensemble, Collectors, EnsembleSpec, GrwParams, IncrementModel};
use crate::records::CensoringPolicy;

/// Rows with `N` above this enter the logarithmic fits by default.
pub const DEFAULT_LOG_FIT_THRESHOLD: usize = 30_000;
pub const MIN_SCALING_N: usize = 100;
pub const MIN_SCALING_REALIZATIONS: usize = 1_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub a_n: f64,
    pub b_n: f64,
    pub k_n: f64,
    pub mean_rmax: f64,
    /// Mean implied by the fitted Fréchet law, when `0 < k < 1`.
    pub frechet_mean: Option<f64>,
    pub n_realizations: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    pub rows: Vec<ScalingRow>,
    pub log_fit_threshold: usize,
    /// `a_N = intercept + slope * ln N` over converged rows above the threshold.
    pub a_fit: Option<LinearFit>,
    pub b_fit: Option<LinearFit>,
    pub mean_rmax_fit: Option<LinearFit>,
    /// Pearson correlation of mean r_max with ln N over all rows.
    pub mean_rmax_ln_n_correlation: Option<f64>,
}

impl ScalingTable {
    /// Builds the table and its log fits. Rows must have strictly increasing
    /// `N`; fits need at least two converged rows above the threshold.
    pub fn from_rows(rows: Vec<ScalingRow>, log_fit_threshold: usize) -> Result<Self> {
        if rows.windows(2).any(|w| w[0].n >= w[1].n) {
            return Err(Error::InvalidInput("N must be strictly increasing".into()));
        }
        let eligible: Vec<&ScalingRow> = rows
            .iter()
            .filter(|r| r.converged && r.n > log_fit_threshold)
            .collect();
        let ln_n: Vec<f64> = eligible.iter().map(|r| (r.n as f64).ln()).collect();
        let fit = |col: fn(&ScalingRow) -> f64| -> Option<LinearFit> {
            if eligible.len() < 2 {
                return None;
            }
            let y: Vec<f64> = eligible.iter().map(|r| col(r)).collect();
            linear_fit(&ln_n, &y).ok()
        };
        let all_ln: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
        let all_mean: Vec<f64> = rows.iter().map(|r| r.mean_rmax).collect();
        Ok(Self {
            a_fit: fit(|r| r.a_n),
            b_fit: fit(|r| r.b_n),
            mean_rmax_fit: fit(|r| r.mean_rmax),
            mean_rmax_ln_n_correlation: pearson(&all_ln, &all_mean).ok(),
            rows,
            log_fit_threshold,
        })
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("n\tln_n\ta_n\tb_n\tk_n\tmean_rmax\tfrechet_mean\tn_realizations\tconverged\n");
        for r in &self.rows {
            let fm = r.frechet_mean.map_or_else(|| "NA".to_string(), |v| v.to_string());
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.n,
                (r.n as f64).ln(),
                r.a_n,
                r.b_n,
                r.k_n,
                r.mean_rmax,
                fm,
                r.n_realizations,
                r.converged
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingOptions {
    pub log_fit_threshold: usize,
    pub censoring: CensoringPolicy,
    pub workers: usize,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        Self {
            log_fit_threshold: DEFAULT_LOG_FIT_THRESHOLD,
            censoring: CensoringPolicy::default(),
            workers: 1,
        }
    }
}

/// Seed of the ensemble run at length `n`.
pub fn length_seed(master_seed: u64, n: usize) -> u64 {
    realization_seed(master_seed, n as u64)
}

/// Runs an ensemble of `m` walks at each `N`, fits a GEV law to the longest
/// record ages, and fits `a_N`, `b_N` and mean r_max against `ln N`.
///
/// `params.n_steps` is ignored. The ensemble at length `N` uses master seed
/// [`length_seed`]`(master_seed, N)`.
pub fn scaling_study(
    params: &GrwParams,
    n_list: &[usize],
    m: usize,
    master_seed: u64,
    opts: &ScalingOptions,
) -> Result<ScalingTable> {
    if n_list.is_empty() {
        return Err(Error::Empty("scaling study needs at least one N"));
    }
    if let Some(n) = n_list.iter().find(|&&n| n < MIN_SCALING_N) {
        return Err(Error::InvalidInput(format!("N = {n} < {MIN_SCALING_N}")));
    }
    if m < MIN_SCALING_REALIZATIONS {
        return Err(Error::InvalidInput(format!(
            "m = {m} < {MIN_SCALING_REALIZATIONS} realizations per N"
        )));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("N list must be strictly increasing".into()));
    }
    let collectors = Collectors {
        longest_age: true,
        ..Collectors::default()
    };
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let mut spec = EnsembleSpec::new(GrwParams { n_steps: n, ..*params }, m, length_seed(master_seed, n));
        spec.censoring = opts.censoring;
        let summary = run_ensemble(&spec, collectors, opts.workers)?;
        let maxima: Vec<f64> = summary.longest_ages().iter().map(|&v| v as f64).collect();
        let mean_rmax = maxima.iter().sum::<f64>() / maxima.len().max(1) as f64;
        let row = match fit_gev(&maxima) {
            Ok(fit) => ScalingRow {
                n,
                a_n: fit.a,
                b_n: fit.b,
                k_n: fit.k,
                mean_rmax,
                frechet_mean: frechet_mean(&fit).ok(),
                n_realizations: maxima.len(),
                converged: true,
                note: (!fit.warnings.is_empty()).then(|| fit.warnings.join("; ")),
            },
            Err(err) => ScalingRow {
                n,
                a_n: f64::NAN,
                b_n: f64::NAN,
                k_n: f64::NAN,
                mean_rmax,
                frechet_mean: None,
                n_realizations: maxima.len(),
                converged: false,
                note: Some(err.to_string()),
            },
        };
        rows.push(row);
    }
    ScalingTable::from_rows(rows, opts.log_fit_threshold)
}

/// Growth exponent of the mean record count, `<count> ~ N^beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordGrowthFit {
    pub beta: f64,
    pub beta_stderr: f64,
    /// False when the stderr cannot be trusted (one realization per N or
    /// fewer than three lengths).
    pub reliable: bool,
    /// `(N, mean record count)` per length.
    pub points: Vec<(usize, f64)>,
}

/// Fits `ln <record count>` against `ln N` for a driftless walk. A non-zero
/// `mu` is rejected: the square-root law only holds without drift.
pub fn mean_records_scaling(
    params: &GrwParams,
    n_list: &[usize],
    m: usize,
    master_seed: u64,
    workers: usize,
) -> Result<RecordGrowthFit> {
    if params.mu != 0.0 {
        return Err(Error::InvalidInput(format!(
            "mean-record scaling needs mu = 0 (got {}); the square-root law holds only without drift",
            params.mu
        )));
    }
    mean_records_scaling_with_model(params, IncrementModel::Gaussian, n_list, m, master_seed, workers)
}

/// As [`mean_records_scaling`] with an explicit increment model and no
/// drift check.
pub fn mean_records_scaling_with_model(
    params: &GrwParams,
    model: IncrementModel,
    n_list: &[usize],
    m: usize,
    master_seed: u64,
    workers: usize,
) -> Result<RecordGrowthFit> {
    if n_list.len() < 2 {
        return Err(Error::InvalidInput("need at least two lengths".into()));
    }
    let collectors = Collectors {
        record_count: true,
        ..Collectors::default()
    };
    let mut points = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let mut spec = EnsembleSpec::new(GrwParams { n_steps: n, ..*params }, m, length_seed(master_seed, n));
        spec.model = model;
        let summary = run_ensemble(&spec, collectors, workers)?;
        let mean = summary
            .mean_record_count()
            .ok_or(Error::Empty("no record counts collected"))?;
        points.push((n, mean));
    }
    let x: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let line = linear_fit(&x, &y)?;
    Ok(RecordGrowthFit {
        beta: line.slope,
        beta_stderr: line.slope_stderr,
        reliable: m >= 2 && points.len() >= 3,
        points,
    })
}
