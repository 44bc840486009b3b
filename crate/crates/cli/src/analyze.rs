use std::fmt::Write as _;
use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use recordlab::grw::realization_seed;
use recordlab::ingest::{estimate_params, parse_daily_csv, portfolio_mean_params, window};
use recordlab::records::{block_maxima, upper_records};
use recordlab::stats::histogram::{AgeCounts, DEFAULT_BINS_PER_DECADE};
use recordlab::{ColumnPolicy, TimeSeries};
use serde_json::{json, Value};

use crate::config::Flags;
use crate::fits::{self, GevOptions};
use crate::output::{self, Output};
use crate::simulate::{autocorr, DEFAULT_TAU_MAX};

pub const DEFAULT_WINDOW: usize = 1000;

fn csv_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        let is_csv = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        if path.is_file() && is_csv {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn load(path: &Path, policy: ColumnPolicy) -> Result<TimeSeries> {
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let file = File::open(path)?;
    Ok(parse_daily_csv(file, policy)?.with_label(label))
}

pub fn run(flags: &Flags, input: &Path, seed: u64, out: &Output) -> Result<()> {
    let policy = if flags.close.unwrap_or(false) {
        ColumnPolicy::Close
    } else {
        ColumnPolicy::AdjustedClose
    };
    let include_censored = flags.include_censored.unwrap_or(false);
    let bpd = flags.bins_per_decade.unwrap_or(DEFAULT_BINS_PER_DECADE);
    let tau_max = flags.tau_max.unwrap_or(DEFAULT_TAU_MAX);
    let window_len = flags.window.unwrap_or(DEFAULT_WINDOW);

    let files = csv_files(input)?;
    if files.is_empty() {
        bail!("no .csv files in {}", input.display());
    }
    let mut series = Vec::new();
    let mut skipped = Vec::new();
    for path in &files {
        match load(path, policy) {
            Ok(ts) => series.push(ts),
            Err(e) => {
                output::warn(format_args!("skipping {}: {e:#}", path.display()));
                skipped.push(json!({ "file": path.display().to_string(), "reason": format!("{e:#}") }));
            }
        }
    }
    if series.is_empty() {
        bail!("none of the {} files in {} could be parsed", files.len(), input.display());
    }

    let mut pooled = AgeCounts::new();
    let mut stocks = Vec::new();
    let mut stats = Vec::new();
    for ts in &series {
        let label = &ts.label;
        let rs = upper_records(&ts.values)?;
        out.tsv(&format!("{label}_fig1a_record_ages.tsv"), &rs.to_tsv())?;
        let ages = rs.record_ages(include_censored);
        let counts = AgeCounts::from_ages(&ages);
        pooled.merge(&counts);
        let range = fits::fit_range(flags.fit_min, flags.fit_max, ts.len());
        fits::power_law(out, &format!("{label}_fig1b"), &counts, bpd, range, include_censored)?;
        autocorr(out, &format!("{label}_fig3"), &ages, tau_max)?;

        let returns = match estimate_params(ts) {
            Ok(r) => {
                stats.push(r);
                output::to_value(&r)
            }
            Err(e) => {
                output::warn(format_args!("{label}: no return statistics: {e}"));
                Value::Null
            }
        };
        stocks.push(json!({
            "label": label,
            "n_values": ts.len(),
            "n_records": rs.record_count(),
            "longest_age": rs.longest_record_age(include_censored).ok(),
            "censored_age": rs.censored_age,
            "returns": returns,
        }));
    }
    let portfolio = portfolio_mean_params(&stats).map_or(Value::Null, |p| output::to_value(&p));
    out.json(
        "returns.json",
        json!({
            "price_column": policy.column_name(),
            "stocks": stocks,
            "portfolio_mean": portfolio,
            "skipped_files": skipped,
        }),
    )?;

    let longest = series.iter().map(TimeSeries::len).max().unwrap_or(0);
    let range = fits::fit_range(flags.fit_min, flags.fit_max, longest);
    fits::power_law(out, "fig2b", &pooled, bpd, range, include_censored)?;

    block_section(out, &series, window_len, include_censored, flags, seed)
}

/// Longest record age of every full window of every stock, pooled.
fn block_section(
    out: &Output,
    series: &[TimeSeries],
    window_len: usize,
    include_censored: bool,
    flags: &Flags,
    seed: u64,
) -> Result<()> {
    let mut table = String::from("stock\tblock\tr_max\n");
    let mut pooled = Vec::new();
    let mut skipped = Vec::new();
    for ts in series {
        let blocks = window(ts, window_len)?;
        if blocks.is_empty() {
            output::warn(format_args!(
                "{}: {} values, shorter than one window of {window_len}",
                ts.label,
                ts.len()
            ));
            continue;
        }
        let bm = block_maxima(&blocks, include_censored)?;
        let kept = (0..blocks.len()).filter(|i| !bm.skipped_blocks.contains(i));
        for (block, r) in kept.zip(&bm.maxima) {
            let _ = writeln!(table, "{}\t{block}\t{r}", ts.label);
        }
        pooled.extend_from_slice(&bm.maxima);
        for b in &bm.skipped_blocks {
            skipped.push(json!({ "stock": ts.label, "block": b }));
        }
    }
    out.tsv("fig5_block_maxima.tsv", &table)?;
    let gev = GevOptions {
        n_boot: flags.n_boot.unwrap_or(0),
        seed: realization_seed(seed, u64::MAX),
        include_censored,
    };
    fits::gev(out, "fig5", &pooled, &gev)?;
    if !skipped.is_empty() {
        out.json(
            "fig5_skipped_blocks.json",
            json!({ "window": window_len, "skipped_blocks": skipped }),
        )?;
    }
    Ok(())
}
