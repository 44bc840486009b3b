//! Independent reference implementations used only by tests.

#![allow(dead_code)]

use rand::Rng;

/// Record times straight from the definition: `t` is a record iff it is the
/// first sample or exceeds the maximum of the whole prefix.
pub fn brute_force_record_times(xs: &[f64]) -> Vec<usize> {
    (0..xs.len())
        .filter(|&t| t == 0 || xs[..t].iter().all(|&p| xs[t] > p))
        .map(|t| t + 1)
        .collect()
}

/// Ages between consecutive brute-force record times plus the open age.
pub fn brute_force_ages(xs: &[f64]) -> (Vec<u64>, Option<u64>) {
    let times = brute_force_record_times(xs);
    let closed = times.windows(2).map(|w| (w[1] - w[0]) as u64).collect();
    let last = *times.last().unwrap();
    let open = (last < xs.len()).then(|| (xs.len() - last) as u64);
    (closed, open)
}

/// Inverse-CDF sampler of `P(r) ∝ r^-alpha` on `1..=support`.
pub struct DiscretePowerLaw {
    cdf: Vec<f64>,
}

impl DiscretePowerLaw {
    pub fn new(alpha: f64, support: usize) -> Self {
        let weights: Vec<f64> = (1..=support).map(|r| (r as f64).powf(-alpha)).collect();
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        Self { cdf }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.gen();
        let i = self.cdf.partition_point(|&c| c < u);
        (i.min(self.cdf.len() - 1) + 1) as u64
    }
}

/// Inverse-CDF GEV sampler: `F(x) = exp(-z^(-1/k))`, so
/// `z = (-ln U)^(-k)` and `x = a + b (z - 1) / k`.
pub fn sample_gev<R: Rng>(rng: &mut R, k: f64, a: f64, b: f64) -> f64 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let z = (-u.ln()).powf(-k);
    a + b * (z - 1.0) / k
}

/// Neumaier-compensated sum in ascending index order, independent of the
/// library's descending plain summation.
pub fn compensated_harmonic(n: u64, alpha: f64) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for r in 1..=n {
        let term = (r as f64).powf(-alpha);
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        let x = lo + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}
