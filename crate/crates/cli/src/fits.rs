//! Fit sections shared by `simulate` and `analyze`.

use std::fmt::Write as _;

use anyhow::Result;
use recordlab::stats::gev::{bootstrap_shape_interval, scaled_density};
use recordlab::stats::histogram::{log_binned_histogram_counts, AgeCounts};
use recordlab::stats::powerlaw::fit_power_law_mle_counts;
use recordlab::stats::{fit_gev, fit_power_law_ls, frechet_mean, scale_maxima};
use serde_json::{json, Value};

use crate::output::{self, Output};

/// Writes `<prefix>_ages_hist.tsv` and `<prefix>_power_law.json`.
pub fn power_law(
    out: &Output,
    prefix: &str,
    counts: &AgeCounts,
    bins_per_decade: usize,
    range: (u64, u64),
    include_censored: bool,
) -> Result<()> {
    let (lo, hi) = range;
    let mut doc = json!({
        "fit_range": [lo, hi],
        "ages_include_censored": include_censored,
        "n_ages": counts.total(),
    });
    match log_binned_histogram_counts(counts, bins_per_decade) {
        Ok(hist) => {
            out.tsv(&format!("{prefix}_ages_hist.tsv"), &hist.to_tsv())?;
            doc["least_squares"] = match fit_power_law_ls(&hist, lo, hi) {
                Ok(fit) => output::ok(&fit),
                Err(e) => output::from_error(&e),
            };
        }
        Err(e) => {
            out.tsv(&format!("{prefix}_ages_hist.tsv"), "center\tdensity\tcount\n")?;
            doc["least_squares"] = output::from_error(&e);
        }
    }
    doc["mle"] = match fit_power_law_mle_counts(counts, lo, hi) {
        Ok(fit) => output::ok(&fit),
        Err(e) => output::from_error(&e),
    };
    out.json(&format!("{prefix}_power_law.json"), doc)
}

pub struct GevOptions {
    pub n_boot: usize,
    pub seed: u64,
    pub include_censored: bool,
}

/// Writes `<prefix>_gev_fit.json` and `<prefix>_scaled_maxima.tsv`. The
/// scaled table lists each maximum with `z = 1 + k (x - a) / b` and the
/// fitted density of `z`, sorted by `x`.
pub fn gev(out: &Output, prefix: &str, maxima: &[u64], opts: &GevOptions) -> Result<()> {
    let xs: Vec<f64> = maxima.iter().map(|&v| v as f64).collect();
    let mut doc = json!({
        "n_maxima": xs.len(),
        "maxima_include_censored": opts.include_censored,
    });
    let mut table = String::from("x\tz\tscaled_density\n");
    let fit = if xs.len() < 2 {
        doc["fit"] = output::not_applicable(format!(
            "{prefix}: GEV fit needs at least 2 maxima, have {}",
            xs.len()
        ));
        None
    } else {
        match fit_gev(&xs) {
            Ok(fit) => {
                doc["fit"] = output::ok(&fit);
                Some(fit)
            }
            Err(e) => {
                doc["fit"] = output::from_error(&e);
                None
            }
        }
    };
    if let Some(fit) = fit {
        doc["frechet_mean"] = frechet_mean(&fit).map_or(Value::Null, Value::from);
        if opts.n_boot > 0 {
            doc["shape_interval"] =
                match bootstrap_shape_interval(&xs, &fit, opts.n_boot, 0.95, opts.seed) {
                    Ok(ci) => output::ok(&ci),
                    Err(e) => output::from_error(&e),
                };
        }
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        let scaled = scale_maxima(&sorted, &fit);
        doc["out_of_support"] = Value::from(scaled.out_of_support.len());
        for (x, z) in sorted.iter().zip(&scaled.z) {
            let _ = writeln!(table, "{x}\t{z}\t{}", scaled_density(*z, fit.k));
        }
    }
    out.tsv(&format!("{prefix}_scaled_maxima.tsv"), &table)?;
    out.json(&format!("{prefix}_gev_fit.json"), doc)
}

/// Default power-law range: `[1, len / 10]`, widened so it holds at least
/// two ages.
pub fn fit_range(fit_min: Option<u64>, fit_max: Option<u64>, longest_series: usize) -> (u64, u64) {
    let lo = fit_min.unwrap_or(1).max(1);
    let hi = fit_max.unwrap_or_else(|| (longest_series as u64 / 10).max(lo + 1));
    (lo, hi)
}
