mod common;

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use rand_xoshiro::Xoshiro256PlusPlus;
use recordlab::grw::{path_from_increments, realization_seed, run_realization};
use recordlab::ingest::{estimate_params, log_returns};
use recordlab::records::upper_records;
use recordlab::stats::histogram::AgeCounts;
use recordlab::{run_ensemble, simulate, Collectors, EnsembleSpec, GrwParams};

const MU: f64 = 0.00031;
const SIGMA: f64 = 0.015;

#[test]
fn injected_increments_are_the_log_differences() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
    let normal = Normal::new(MU, SIGMA).unwrap();
    let inc: Vec<f64> = (0..500).map(|_| normal.sample(&mut rng)).collect();
    let ts = path_from_increments(1.0, &inc).unwrap();
    let logs: Vec<f64> = ts.values.iter().map(|v| v.ln()).collect();
    for (i, xi) in inc.iter().enumerate() {
        assert!((logs[i + 1] - logs[i] - xi).abs() < 1e-12);
    }
}

#[test]
fn mean_log_return_within_clt_band() {
    let n = 100_000;
    let ts = simulate(&GrwParams::new(MU, SIGMA, n), 2024).unwrap();
    let r = log_returns(&ts).unwrap();
    let m = common::mean(&r);
    let band = 3.0 * SIGMA / ((n - 1) as f64).sqrt();
    assert!((m - MU).abs() < band, "mean {m} outside {MU} ± {band}");

    let est = estimate_params(&ts).unwrap();
    assert!((est.mu - MU).abs() < band);
    assert!((est.sigma - SIGMA).abs() < 0.02 * SIGMA);
}

#[test]
fn single_realization_ensemble_matches_pipeline() {
    let spec = EnsembleSpec::new(GrwParams::new(MU, SIGMA, 3000), 1, 77);
    let summary = run_ensemble(&spec, Collectors::all(), 1).unwrap();
    let ts = simulate(&spec.params, realization_seed(77, 0)).unwrap();
    let rs = upper_records(&ts.values).unwrap();
    assert_eq!(summary.realizations.len(), 1);
    let row = summary.realizations[0];
    assert_eq!(row.record_count, Some(rs.record_count()));
    assert_eq!(row.r_max, rs.longest_record_age(false).ok());
    assert_eq!(
        summary.age_counts.unwrap(),
        AgeCounts::from_ages(&rs.record_ages(false))
    );
}

#[test]
fn any_realization_reproduces_standalone() {
    let mut spec = EnsembleSpec::new(GrwParams::new(MU, SIGMA, 2000), 50, 5);
    spec.censoring.maxima_include_censored = true;
    let summary = run_ensemble(&spec, Collectors::all(), 3).unwrap();
    for j in [0u64, 17, 49] {
        let rs = run_realization(&spec, j).unwrap();
        let row = summary.realizations[j as usize];
        assert_eq!(row.index, j);
        assert_eq!(row.r_max, Some(rs.longest_record_age(true).unwrap()));
        assert_eq!(row.record_count, Some(rs.record_count()));
    }
}

#[test]
fn worker_count_does_not_change_summary() {
    let spec = EnsembleSpec::new(GrwParams::new(MU, SIGMA, 5000), 200, 99);
    let one = run_ensemble(&spec, Collectors::all(), 1).unwrap().to_json();
    let many = run_ensemble(&spec, Collectors::all(), 8).unwrap().to_json();
    assert_eq!(one, many);
}

#[test]
fn records_of_path_and_log_path_agree() {
    let p = GrwParams::new(MU, SIGMA, 5000);
    for seed in 0..100 {
        let ts = simulate(&p, seed).unwrap();
        let logs: Vec<f64> = ts.values.iter().map(|v| v.ln()).collect();
        assert_eq!(
            upper_records(&ts.values).unwrap().record_times,
            upper_records(&logs).unwrap().record_times
        );
    }
}

#[test]
fn summary_json_has_spec_echo_and_rng() {
    let spec = EnsembleSpec::new(GrwParams::new(MU, SIGMA, 500), 4, 1);
    let json = run_ensemble(&spec, Collectors::all(), 1).unwrap().to_json();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["spec"]["master_seed"], 1);
    assert_eq!(v["spec"]["n_realizations"], 4);
    assert!(v["rng"]["generator"].as_str().unwrap().contains("xoshiro256++"));
    assert!(v["age_histogram"]["centers"].is_array());
    assert_eq!(v["realizations"].as_array().unwrap().len(), 4);
}
