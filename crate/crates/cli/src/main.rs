//! `recordlab` command-line front end.
//!
//! Every command writes plain TSV/JSON tables into `--out`. Each file
//! carries the fully resolved configuration (JSON under `"config"`, TSV in a
//! leading `# recordlab {...}` line), and `run_config.json` holds it alone;
//! passing any of them back through `--config` reproduces the run.

mod analyze;
mod config;
mod fits;
mod output;
mod scaling;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand};
use recordlab::GrwParams;

use config::{Embedded, Flags};
use output::Output;

#[derive(Parser)]
#[command(name = "recordlab", version, about = "Record statistics of stock prices and geometric random walks")]
struct Cli {
    /// JSON config supplying any flag; flags given here override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one walk (`--m 1`) or an ensemble of walks.
    Simulate(Flags),
    /// Analyze a directory of daily price CSV files.
    Analyze(Flags),
    /// Longest-record-age statistics across series lengths.
    Scaling(Flags),
}

fn missing(name: &str) -> ! {
    Cli::command()
        .error(ErrorKind::MissingRequiredArgument, format!("missing required option --{name}"))
        .exit()
}

fn need<T: Clone>(v: &Option<T>, name: &str) -> T {
    v.clone().unwrap_or_else(|| missing(name))
}

fn seed_or_generate(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random();
        eprintln!("seed: {s} (generated)");
        s
    })
}

/// Keeps only the options `command` reads and fills in every default, so
/// the embedded config is explicit.
fn resolve(command: &str, f: Flags) -> Flags {
    let mut r = Flags {
        include_censored: Some(f.include_censored.unwrap_or(false)),
        ..Flags::default()
    };
    let fit_min = Some(f.fit_min.unwrap_or(1));
    let bpd = Some(
        f.bins_per_decade
            .unwrap_or(recordlab::stats::histogram::DEFAULT_BINS_PER_DECADE),
    );
    match command {
        "simulate" => {
            let n = need(&f.n, "n");
            let sigma = need(&f.sigma, "sigma");
            let m = f.m.unwrap_or(1);
            let (lo, hi) = fits::fit_range(fit_min, f.fit_max, n);
            r.mu = Some(f.mu.unwrap_or(0.0));
            r.sigma = Some(sigma);
            r.n = Some(n);
            r.m = Some(m);
            r.y0 = Some(f.y0.unwrap_or(1.0));
            r.bins_per_decade = bpd;
            r.fit_min = Some(lo);
            r.fit_max = Some(hi);
            if m == 1 {
                r.tau_max = Some(f.tau_max.unwrap_or(simulate::DEFAULT_TAU_MAX));
            } else {
                r.n_boot = Some(f.n_boot.unwrap_or(0));
            }
        }
        "analyze" => {
            r.input = Some(need(&f.input, "input"));
            r.close = Some(f.close.unwrap_or(false));
            r.window = Some(f.window.unwrap_or(analyze::DEFAULT_WINDOW));
            r.bins_per_decade = bpd;
            r.fit_min = fit_min;
            r.fit_max = f.fit_max;
            r.tau_max = Some(f.tau_max.unwrap_or(simulate::DEFAULT_TAU_MAX));
            r.n_boot = Some(f.n_boot.unwrap_or(0));
        }
        _ => {
            r.sigma = Some(need(&f.sigma, "sigma"));
            r.n_list = Some(need(&f.n_list, "n-list"));
            r.mu = Some(f.mu.unwrap_or(0.0));
            r.y0 = Some(f.y0.unwrap_or(1.0));
            r.m = Some(f.m.unwrap_or(scaling::DEFAULT_M));
            r.threshold = Some(
                f.threshold
                    .unwrap_or(recordlab::stats::scaling::DEFAULT_LOG_FIT_THRESHOLD),
            );
        }
    }
    r.seed = Some(seed_or_generate(f.seed));
    r
}

fn grw_params(f: &Flags, n: usize) -> GrwParams {
    GrwParams {
        y0: f.y0.unwrap_or(1.0),
        ..GrwParams::new(f.mu.unwrap_or(0.0), f.sigma.unwrap_or(0.0), n)
    }
}

fn run(cli: Cli) -> Result<()> {
    let (name, flags) = match &cli.command {
        Command::Simulate(f) => ("simulate", f),
        Command::Analyze(f) => ("analyze", f),
        Command::Scaling(f) => ("scaling", f),
    };
    let merged = config::merge(cli.config.as_deref(), flags)?;
    let out_dir = merged.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let f = resolve(name, merged);
    let seed = f.seed.expect("resolved");
    let workers = config::threads();
    if name != "analyze" {
        grw_params(&f, f.n.unwrap_or(2)).validate()?;
    }
    let out = Output::create(&out_dir, Embedded::new(name, f.clone()))?;
    match name {
        "simulate" => {
            let n = f.n.expect("resolved");
            simulate::run(&f, grw_params(&f, n), f.m.expect("resolved"), seed, &out, workers)
        }
        "analyze" => analyze::run(&f, f.input.as_deref().expect("resolved"), seed, &out),
        _ => {
            scaling::run(&f, grw_params(&f, 2), f.n_list.as_deref().expect("resolved"), seed, &out, workers)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
