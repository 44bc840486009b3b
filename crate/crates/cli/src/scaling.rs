use anyhow::Result;
use recordlab::records::CensoringPolicy;
use recordlab::stats::scaling::{scaling_study, ScalingOptions, DEFAULT_LOG_FIT_THRESHOLD};
use recordlab::GrwParams;
use serde_json::json;

use crate::config::Flags;
use crate::output::{self, Output};

pub const DEFAULT_M: usize = 1000;

pub fn run(flags: &Flags, params: GrwParams, n_list: &[usize], seed: u64, out: &Output, workers: usize) -> Result<()> {
    let include_censored = flags.include_censored.unwrap_or(false);
    let opts = ScalingOptions {
        log_fit_threshold: flags.threshold.unwrap_or(DEFAULT_LOG_FIT_THRESHOLD),
        censoring: CensoringPolicy {
            ages_include_censored: include_censored,
            maxima_include_censored: include_censored,
        },
        workers,
    };
    let m = flags.m.unwrap_or(DEFAULT_M);
    let table = scaling_study(&params, n_list, m, seed, &opts)?;
    for r in table.rows.iter().filter(|r| !r.converged) {
        output::warn(format_args!(
            "N = {}: GEV fit failed: {}",
            r.n,
            r.note.as_deref().unwrap_or("unknown")
        ));
    }
    out.tsv("fig4cd_scaling.tsv", &table.to_tsv())?;

    let eligible = table
        .rows
        .iter()
        .filter(|r| r.converged && r.n > opts.log_fit_threshold)
        .count();
    let log_fit = match (&table.a_fit, &table.b_fit, &table.mean_rmax_fit) {
        (Some(a), Some(b), Some(mean)) => json!({
            "status": "ok",
            "a_n": a,
            "b_n": b,
            "mean_rmax": mean,
        }),
        _ => output::not_applicable(format!(
            "log fit needs at least 2 converged rows with N > {}, have {eligible}",
            opts.log_fit_threshold
        )),
    };
    out.json(
        "fig4cd_scaling.json",
        json!({
            "maxima_include_censored": include_censored,
            "log_fit_threshold": table.log_fit_threshold,
            "rows": table.rows,
            "log_fit": log_fit,
            "mean_rmax_ln_n_correlation": table.mean_rmax_ln_n_correlation,
        }),
    )
}
