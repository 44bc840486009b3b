use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn recordlab(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_recordlab"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("RECORDLAB_THREADS", t),
        None => cmd.env_remove("RECORDLAB_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = recordlab(args, None);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

/// Every regular file in `dir`, name and bytes, sorted by name.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

/// Daily prices from a deterministic multiplicative walk.
fn write_csv(dir: &Path, name: &str, n: usize, seed: u64) {
    let mut s = String::from("Date,Open,High,Low,Close,Volume,Adj Close\n");
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let mut y = 20.0f64;
    let start = 10_000; // days since 1970-01-01
    for i in 0..n {
        let (yr, mo, dy) = civil(start + i as i64);
        s.push_str(&format!("{yr:04}-{mo:02}-{dy:02},{y},{y},{y},{},1000,{y}\n", y * 1.5));
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        let u = (state >> 11) as f64 / (1u64 << 53) as f64;
        y *= (0.03 * (u - 0.49)).exp();
    }
    fs::write(dir.join(name), s).unwrap();
}

/// Days since the Unix epoch to a proleptic Gregorian date.
fn civil(z: i64) -> (i64, u32, u32) {
    let z = z + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    let y = yoe + era * 400 + i64::from(m <= 2);
    (y, m, d)
}

#[test]
fn single_walk_writes_series_tsv() {
    let out = TempDir::new().unwrap();
    ok(&["simulate", "--mu", "0.00031", "--sigma", "0.015", "--n", "500", "--m", "1", "--seed", "3", "--out", &path(&out, "")]);
    let text = fs::read_to_string(out.path().join("series.tsv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# recordlab {"));
    assert_eq!(lines.next(), Some("t\tvalue"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 500);
    assert_eq!(rows[0], "1\t1");
    assert!(out.path().join("fig1a_record_ages.tsv").exists());
    assert!(out.path().join("fig3_autocorr.tsv").exists());
}

#[test]
fn ensemble_writes_summary_with_histogram() {
    let out = TempDir::new().unwrap();
    ok(&["simulate", "--mu", "0.00031", "--sigma", "0.015", "--n", "2000", "--m", "200", "--seed", "42", "--out", &path(&out, "")]);
    let summary = json(&out.path().join("ensemble_summary.json"));
    assert_eq!(summary["config"]["seed"], 42);
    assert_eq!(summary["spec"]["master_seed"], 42);
    assert!(!summary["age_histogram"]["centers"].as_array().unwrap().is_empty());
    assert_eq!(summary["realizations"].as_array().unwrap().len(), 200);
    let fit = json(&out.path().join("fig2a_power_law.json"));
    assert_eq!(fit["mle"]["status"], "ok");
    assert_eq!(fit["ages_include_censored"], false);
    for name in ["fig2a_ages_hist.tsv", "fig4ab_rmax.tsv", "fig4ab_gev_fit.json", "fig4ab_scaled_maxima.tsv"] {
        assert!(out.path().join(name).exists(), "{name}");
    }
}

#[test]
fn missing_sigma_is_a_usage_error() {
    let out = TempDir::new().unwrap();
    let res = recordlab(&["simulate", "--mu", "0.0003", "--n", "100", "--out", &path(&out, "x")], None);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("--sigma"));
    assert!(!out.path().join("x").exists());
}

#[test]
fn generated_seed_is_reported_and_embedded() {
    let out = TempDir::new().unwrap();
    let res = ok(&["simulate", "--sigma", "0.01", "--n", "50", "--out", &path(&out, "")]);
    let stderr = String::from_utf8_lossy(&res.stderr);
    let config = json(&out.path().join("run_config.json"));
    let seed = config["seed"].as_u64().unwrap();
    assert!(stderr.contains(&seed.to_string()));
}

#[test]
fn rerun_from_embedded_config_is_byte_identical() {
    let first = TempDir::new().unwrap();
    let second = TempDir::new().unwrap();
    ok(&["simulate", "--sigma", "0.015", "--mu", "0.0003", "--n", "1000", "--m", "50", "--out", &path(&first, "")]);
    // Any output document carries the config; use a JSON table here.
    ok(&["simulate", "--config", &path(&first, "fig4ab_gev_fit.json"), "--out", &path(&second, "")]);
    assert_eq!(snapshot(first.path()), snapshot(second.path()));

    let third = TempDir::new().unwrap();
    ok(&["simulate", "--sigma", "0.015", "--n", "300", "--seed", "9", "--out", &path(&third, "")]);
    let fourth = TempDir::new().unwrap();
    ok(&["simulate", "--config", &path(&third, "run_config.json"), "--out", &path(&fourth, "")]);
    assert_eq!(snapshot(third.path()), snapshot(fourth.path()));
}

#[test]
fn thread_count_does_not_change_outputs() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = |dir: &TempDir| {
        vec!["simulate", "--sigma", "0.015", "--mu", "0.0003", "--n", "1500", "--m", "300", "--seed", "5", "--out"]
            .into_iter()
            .map(String::from)
            .chain([path(dir, "")])
            .collect::<Vec<_>>()
    };
    let run = |dir: &TempDir, t: &str| {
        let argv = args(dir);
        let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
        assert!(recordlab(&argv, Some(t)).status.success());
    };
    run(&a, "1");
    run(&b, "6");
    assert_eq!(snapshot(a.path()), snapshot(b.path()));
}

#[test]
fn config_file_supplies_flags_and_flags_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"mu": 0.0003, "sigma": 0.02, "n": 400, "seed": 11, "m": 1}"#).unwrap();
    let out = dir.path().join("out");
    ok(&["simulate", "--config", cfg.to_str().unwrap(), "--n", "250", "--out", out.to_str().unwrap()]);
    let config = json(&out.join("run_config.json"));
    assert_eq!(config["n"], 250);
    assert_eq!(config["sigma"], 0.02);
    assert_eq!(config["seed"], 11);
    assert_eq!(config["command"], "simulate");
    let series = fs::read_to_string(out.join("series.tsv")).unwrap();
    assert_eq!(series.lines().count(), 2 + 250);
}

#[test]
fn analyze_pools_stocks() {
    let input = TempDir::new().unwrap();
    write_csv(input.path(), "AAA.csv", 2600, 1);
    write_csv(input.path(), "BBB.csv", 3100, 2);
    write_csv(input.path(), "CCC.csv", 2200, 3);
    let out = TempDir::new().unwrap();
    ok(&["analyze", "--input", input.path().to_str().unwrap(), "--seed", "1", "--out", &path(&out, "")]);
    for label in ["AAA", "BBB", "CCC"] {
        for suffix in ["fig1a_record_ages.tsv", "fig1b_ages_hist.tsv", "fig1b_power_law.json", "fig3_autocorr.tsv"] {
            assert!(out.path().join(format!("{label}_{suffix}")).exists(), "{label}_{suffix}");
        }
    }
    let returns = json(&out.path().join("returns.json"));
    assert_eq!(returns["stocks"].as_array().unwrap().len(), 3);
    assert_eq!(returns["price_column"], "Adj Close");
    assert_eq!(returns["portfolio_mean"]["n_returns"], 2599 + 3099 + 2199);
    let pooled = json(&out.path().join("fig2b_power_law.json"));
    let per_stock: u64 = ["AAA", "BBB", "CCC"]
        .iter()
        .map(|l| json(&out.path().join(format!("{l}_fig1b_power_law.json")))["n_ages"].as_u64().unwrap())
        .sum();
    assert_eq!(pooled["n_ages"].as_u64().unwrap(), per_stock);
    let blocks = fs::read_to_string(out.path().join("fig5_block_maxima.tsv")).unwrap();
    let gev = json(&out.path().join("fig5_gev_fit.json"));
    assert_eq!(gev["n_maxima"].as_u64().unwrap() as usize, blocks.lines().count() - 2);
}

#[test]
fn analyze_short_file_has_no_block_maxima() {
    let input = TempDir::new().unwrap();
    write_csv(input.path(), "TINY.csv", 400, 4);
    let out = TempDir::new().unwrap();
    ok(&["analyze", "--input", input.path().to_str().unwrap(), "--seed", "1", "--out", &path(&out, "")]);
    let blocks = fs::read_to_string(out.path().join("fig5_block_maxima.tsv")).unwrap();
    assert_eq!(blocks.lines().count(), 2, "header and comment only");
    let gev = json(&out.path().join("fig5_gev_fit.json"));
    assert_eq!(gev["n_maxima"], 0);
    assert_eq!(gev["fit"]["status"], "not_applicable");
    let records = fs::read_to_string(out.path().join("TINY_fig1a_record_ages.tsv")).unwrap();
    assert!(records.lines().count() > 3);
}

#[test]
fn analyze_skips_bad_files_and_fails_when_none_parse() {
    let input = TempDir::new().unwrap();
    fs::write(input.path().join("bad.csv"), "Date,Adj Close\nyesterday,1\n").unwrap();
    let out = TempDir::new().unwrap();
    let res = recordlab(&["analyze", "--input", input.path().to_str().unwrap(), "--seed", "1", "--out", &path(&out, "")], None);
    assert!(!res.status.success());

    write_csv(input.path(), "GOOD.csv", 1500, 5);
    let res = ok(&["analyze", "--input", input.path().to_str().unwrap(), "--seed", "1", "--out", &path(&out, "")]);
    assert!(String::from_utf8_lossy(&res.stderr).contains("bad.csv"));
    let returns = json(&out.path().join("returns.json"));
    assert_eq!(returns["skipped_files"].as_array().unwrap().len(), 1);
    assert_eq!(returns["stocks"][0]["label"], "GOOD");
}

#[test]
fn analyze_empty_directory_fails() {
    let input = TempDir::new().unwrap();
    let out = TempDir::new().unwrap();
    let res = recordlab(&["analyze", "--input", input.path().to_str().unwrap(), "--out", &path(&out, "")], None);
    assert!(!res.status.success());
}

#[test]
fn scaling_single_n_has_no_log_fit() {
    let out = TempDir::new().unwrap();
    ok(&["scaling", "--sigma", "0.015", "--n-list", "200", "--m", "1000", "--seed", "2", "--out", &path(&out, "")]);
    let doc = json(&out.path().join("fig4cd_scaling.json"));
    assert_eq!(doc["rows"].as_array().unwrap().len(), 1);
    assert_eq!(doc["log_fit"]["status"], "not_applicable");
    let tsv = fs::read_to_string(out.path().join("fig4cd_scaling.tsv")).unwrap();
    assert_eq!(tsv.lines().count(), 3);
}

#[test]
fn scaling_threshold_controls_log_fit() {
    let out = TempDir::new().unwrap();
    let base = ["scaling", "--sigma", "0.015", "--n-list", "128,256,512", "--m", "1000", "--seed", "2"];
    let above = path(&out, "above");
    let mut args = base.to_vec();
    args.extend(["--threshold", "100000", "--out", &above]);
    ok(&args);
    let doc = json(&Path::new(&above).join("fig4cd_scaling.json"));
    assert_eq!(doc["log_fit"]["status"], "not_applicable");

    let below = path(&out, "below");
    let mut args = base.to_vec();
    args.extend(["--threshold", "100", "--out", &below]);
    ok(&args);
    let doc = json(&Path::new(&below).join("fig4cd_scaling.json"));
    assert_eq!(doc["log_fit"]["status"], "ok");
    assert!(doc["log_fit"]["a_n"]["slope"].is_number());
    assert_eq!(doc["rows"].as_array().unwrap().len(), 3);
}
