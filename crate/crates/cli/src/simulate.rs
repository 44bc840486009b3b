use std::fmt::Write as _;

use anyhow::Result;
use recordlab::grw::realization_seed;
use recordlab::records::{upper_records, CensoringPolicy};
use recordlab::stats::autocorrelation;
use recordlab::stats::histogram::{AgeCounts, DEFAULT_BINS_PER_DECADE};
use recordlab::{run_ensemble, simulate, Collectors, EnsembleSpec, GrwParams};

use crate::config::Flags;
use crate::fits::{self, GevOptions};
use crate::output::{self, Output};

pub const DEFAULT_TAU_MAX: usize = 20;
const DEFAULT_N_BOOT: usize = 0;

pub fn run(flags: &Flags, params: GrwParams, m: usize, seed: u64, out: &Output, workers: usize) -> Result<()> {
    let include_censored = flags.include_censored.unwrap_or(false);
    let bpd = flags.bins_per_decade.unwrap_or(DEFAULT_BINS_PER_DECADE);
    let range = fits::fit_range(flags.fit_min, flags.fit_max, params.n_steps);
    if m == 1 {
        single(flags, &params, seed, out, include_censored, bpd, range)
    } else {
        let mut spec = EnsembleSpec::new(params, m, seed);
        spec.bins_per_decade = bpd;
        spec.censoring = CensoringPolicy {
            ages_include_censored: include_censored,
            maxima_include_censored: include_censored,
        };
        let summary = run_ensemble(&spec, Collectors::all(), workers)?;
        out.json("ensemble_summary.json", output::to_value(&summary))?;

        let counts = summary.age_counts.clone().unwrap_or_default();
        fits::power_law(out, "fig2a", &counts, bpd, range, include_censored)?;

        let maxima = summary.longest_ages();
        let mut table = String::from("realization\tr_max\trecord_count\n");
        for r in &summary.realizations {
            let rmax = r.r_max.map_or_else(|| "NA".into(), |v| v.to_string());
            let count = r.record_count.map_or_else(|| "NA".into(), |v| v.to_string());
            let _ = writeln!(table, "{}\t{rmax}\t{count}", r.index);
        }
        out.tsv("fig4ab_rmax.tsv", &table)?;
        let gev = GevOptions {
            n_boot: flags.n_boot.unwrap_or(DEFAULT_N_BOOT),
            seed: realization_seed(seed, u64::MAX),
            include_censored,
        };
        fits::gev(out, "fig4ab", &maxima, &gev)
    }
}

/// One walk: the series, its records, the age histogram and the age
/// autocorrelation. The walk is realization 0 of the ensemble with the same
/// seed.
fn single(
    flags: &Flags,
    params: &GrwParams,
    seed: u64,
    out: &Output,
    include_censored: bool,
    bpd: usize,
    range: (u64, u64),
) -> Result<()> {
    let series = simulate(params, realization_seed(seed, 0))?;
    let mut table = String::from("t\tvalue\n");
    for (i, v) in series.values.iter().enumerate() {
        let _ = writeln!(table, "{}\t{v}", i + 1);
    }
    out.tsv("series.tsv", &table)?;

    let rs = upper_records(&series.values)?;
    out.tsv("fig1a_record_ages.tsv", &rs.to_tsv())?;
    let ages = rs.record_ages(include_censored);
    fits::power_law(out, "fig1b", &AgeCounts::from_ages(&ages), bpd, range, include_censored)?;
    autocorr(out, "fig3", &ages, flags.tau_max.unwrap_or(DEFAULT_TAU_MAX))
}

/// Writes `<prefix>_autocorr.tsv`, or a header-only table with a warning
/// when the ages are too few or constant.
pub fn autocorr(out: &Output, prefix: &str, ages: &[u64], tau_max: usize) -> Result<()> {
    let xs: Vec<f64> = ages.iter().map(|&a| a as f64).collect();
    let tau = tau_max.min(xs.len().saturating_sub(1));
    let body = match autocorrelation(&xs, tau) {
        Ok(c) => c.to_tsv(),
        Err(e) => {
            output::warn(format_args!("{prefix}: autocorrelation skipped: {e}"));
            "lag\tautocorr\n".to_string()
        }
    };
    out.tsv(&format!("{prefix}_autocorr.tsv"), &body)
}
