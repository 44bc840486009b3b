//! Generalized extreme value (GEV) law for block maxima of record ages.
//!
//! Parameterization: shape `k`, location `a`, scale `b > 0`, with scaled
//! variable `z = 1 + k (x - a) / b`. The density is
//! `(1/b) z^(-1-1/k) exp(-z^(-1/k))` for `z > 0` and zero elsewhere. `k > 0`
//! is the heavy-tailed Fréchet branch.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use super::optimize::{nelder_mead, NelderMeadOptions};
use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Below this |k| the Gumbel limit is used.
const GUMBEL_EPS: f64 = 1e-9;
/// Fits on fewer samples are flagged as low confidence.
pub const MIN_CONFIDENT_SAMPLES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GevFit {
    pub k: f64,
    pub a: f64,
    pub b: f64,
    pub log_likelihood: f64,
    /// Log-likelihood at the moment-based starting point.
    pub initial_log_likelihood: f64,
    pub converged: bool,
    pub n_samples: usize,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl GevFit {
    /// Bare parameter set, e.g. for evaluating a known law.
    pub fn from_params(k: f64, a: f64, b: f64) -> Self {
        Self {
            k,
            a,
            b,
            log_likelihood: f64::NAN,
            initial_log_likelihood: f64::NAN,
            converged: true,
            n_samples: 0,
            iterations: 0,
            warnings: Vec::new(),
        }
    }

    pub fn is_frechet(&self) -> bool {
        self.k > 0.0
    }

    pub fn z(&self, x: f64) -> f64 {
        1.0 + self.k * (x - self.a) / self.b
    }

    pub fn cdf(&self, x: f64) -> f64 {
        gev_cdf(x, self.k, self.a, self.b)
    }
}

/// Log-density of one observation, `-inf` outside the support.
#[inline]
fn log_density(x: f64, k: f64, a: f64, b: f64) -> f64 {
    let y = (x - a) / b;
    if k.abs() < GUMBEL_EPS {
        return -b.ln() - y - (-y).exp();
    }
    let ky = k * y;
    if ky <= -1.0 {
        return f64::NEG_INFINITY;
    }
    let ln_z = ky.ln_1p();
    -b.ln() - (1.0 + 1.0 / k) * ln_z - (-ln_z / k).exp()
}

pub fn gev_cdf(x: f64, k: f64, a: f64, b: f64) -> f64 {
    let y = (x - a) / b;
    if k.abs() < GUMBEL_EPS {
        return (-(-y).exp()).exp();
    }
    let z = 1.0 + k * y;
    if z <= 0.0 {
        return if k > 0.0 { 0.0 } else { 1.0 };
    }
    (-z.powf(-1.0 / k)).exp()
}

/// Density at `x`; zero outside the support.
pub fn gev_density(x: f64, fit: &GevFit) -> f64 {
    if !(fit.b > 0.0) {
        return 0.0;
    }
    let l = log_density(x, fit.k, fit.a, fit.b);
    if l == f64::NEG_INFINITY {
        0.0
    } else {
        l.exp()
    }
}

/// Density of the scaled variable `z` itself, `(1/k) z^(-1-1/k) exp(-z^(-1/k))`.
pub fn scaled_density(z: f64, k: f64) -> f64 {
    if z <= 0.0 || k <= 0.0 {
        return 0.0;
    }
    z.powf(-1.0 - 1.0 / k) * (-z.powf(-1.0 / k)).exp() / k
}

/// Total log-likelihood of the samples.
pub fn gev_log_likelihood(samples: &[f64], k: f64, a: f64, b: f64) -> f64 {
    if !(b > 0.0) {
        return f64::NEG_INFINITY;
    }
    samples.iter().map(|&x| log_density(x, k, a, b)).sum()
}

/// Distinct sample values with multiplicities. Integer-valued maxima repeat
/// heavily, so the likelihood is evaluated once per distinct value.
struct Grouped {
    values: Vec<f64>,
    weights: Vec<f64>,
    n: usize,
}

impl Grouped {
    fn new(samples: &[f64]) -> Self {
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut values: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for x in sorted {
            if values.last() == Some(&x) {
                *weights.last_mut().unwrap() += 1.0;
            } else {
                values.push(x);
                weights.push(1.0);
            }
        }
        Self {
            values,
            weights,
            n: samples.len(),
        }
    }

    fn log_likelihood(&self, k: f64, a: f64, b: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * log_density(x, k, a, b))
            .sum()
    }

    /// Sum of `-z` over out-of-support samples, 0 when all are inside.
    fn violation(&self, k: f64, a: f64, b: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| {
                let z = 1.0 + k * (x - a) / b;
                if z <= 0.0 {
                    w * (1e-12 - z)
                } else {
                    0.0
                }
            })
            .sum()
    }

    fn moments(&self) -> (f64, f64) {
        let n = self.n as f64;
        let mean = self
            .values
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| x * w)
            .sum::<f64>()
            / n;
        let ss: f64 = self
            .values
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * (x - mean) * (x - mean))
            .sum();
        (mean, (ss / (n - 1.0)).sqrt())
    }
}

/// Method-of-moments start: Gumbel location and scale with a small positive
/// shape, shrunk toward zero until every sample is inside the support.
fn moment_start(g: &Grouped) -> [f64; 3] {
    let (mean, sd) = g.moments();
    let b = sd * 6f64.sqrt() / std::f64::consts::PI;
    let a = mean - EULER_GAMMA * b;
    let mut k = 0.1;
    while g.violation(k, a, b) > 0.0 && k > 1e-6 {
        k *= 0.5;
    }
    [k, a, b]
}

fn fit_grouped(g: &Grouped, start: [f64; 3]) -> Result<GevFit> {
    let (_, sd) = g.moments();
    let initial_log_likelihood = g.log_likelihood(start[0], start[1], start[2]);
    let penalty_base = initial_log_likelihood.abs().max(1.0) * 1e6;

    // Search over (k, a, ln b) so that b stays positive.
    let objective = |p: &[f64]| {
        let (k, a, b) = (p[0], p[1], p[2].exp());
        let v = g.violation(k, a, b);
        if v > 0.0 {
            penalty_base * (1.0 + v)
        } else {
            -g.log_likelihood(k, a, b)
        }
    };
    let opts = NelderMeadOptions::default();
    let mut x = vec![start[0], start[1], start[2].ln()];
    let mut steps = vec![0.1, 0.1 * start[2], 0.1];
    let mut iterations = 0;
    let mut converged = false;
    let mut best = f64::INFINITY;
    // Restart from the optimum with a fresh simplex until it stops improving.
    for _ in 0..6 {
        let r = nelder_mead(objective, &x, &steps, &opts);
        iterations += r.iterations;
        converged = r.converged;
        let improved = best - r.fx > 1e-10 * (1.0 + r.fx.abs());
        x = r.x;
        best = best.min(r.fx);
        if !improved || !converged {
            break;
        }
        steps = vec![0.02, 0.02 * x[2].exp(), 0.02];
    }

    let (k, a, b) = (x[0], x[1], x[2].exp());
    if !converged {
        return Err(Error::GevNotConverged {
            iterations,
            reason: format!("simplex did not contract (k={k}, a={a}, b={b})"),
        });
    }
    if g.violation(k, a, b) > 0.0 {
        return Err(Error::GevNotConverged {
            iterations,
            reason: format!("optimum violates the support constraint (k={k}, a={a}, b={b})"),
        });
    }
    if b < 1e-9 * sd || k.abs() > 50.0 {
        return Err(Error::GevNotConverged {
            iterations,
            reason: format!("solution pinned at a parameter boundary (k={k}, b={b})"),
        });
    }
    let mut warnings = Vec::new();
    if g.n < MIN_CONFIDENT_SAMPLES {
        warnings.push(format!(
            "only {} samples; fit is low confidence",
            g.n
        ));
    }
    if k <= 0.0 {
        warnings.push(format!("shape k = {k} is outside the Fréchet regime (k > 0)"));
    }
    Ok(GevFit {
        k,
        a,
        b,
        log_likelihood: g.log_likelihood(k, a, b),
        initial_log_likelihood,
        converged: true,
        n_samples: g.n,
        iterations,
        warnings,
    })
}

fn check_samples(maxima: &[f64]) -> Result<()> {
    if maxima.len() < 2 {
        return Err(Error::Degenerate(format!(
            "GEV fit needs at least 2 samples, got {}",
            maxima.len()
        )));
    }
    if let Some(x) = maxima.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite sample {x}")));
    }
    if maxima.iter().all(|&x| x == maxima[0]) {
        return Err(Error::Degenerate("all samples are equal".into()));
    }
    Ok(())
}

/// Maximum-likelihood GEV fit by Nelder–Mead from a moment-based start,
/// with a penalty for parameters that leave samples outside the support.
pub fn fit_gev(maxima: &[f64]) -> Result<GevFit> {
    check_samples(maxima)?;
    let g = Grouped::new(maxima);
    fit_grouped(&g, moment_start(&g))
}

/// Percentile bootstrap interval for the shape `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeInterval {
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
    pub n_boot: usize,
    /// Resamples whose fit failed; excluded from the percentiles.
    pub failed: usize,
}

/// Resamples `maxima` with replacement `n_boot` times, refits each resample
/// starting from `fit`, and reports the central `level` percentile range of
/// the fitted shapes.
pub fn bootstrap_shape_interval(
    maxima: &[f64],
    fit: &GevFit,
    n_boot: usize,
    level: f64,
    seed: u64,
) -> Result<ShapeInterval> {
    check_samples(maxima)?;
    if n_boot < 2 || !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidInput("need n_boot >= 2 and 0 < level < 1".into()));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut shapes = Vec::with_capacity(n_boot);
    let mut failed = 0;
    let mut resample = vec![0.0; maxima.len()];
    for _ in 0..n_boot {
        for slot in resample.iter_mut() {
            *slot = maxima[rng.gen_range(0..maxima.len())];
        }
        let g = Grouped::new(&resample);
        let start = if g.violation(fit.k, fit.a, fit.b) > 0.0 {
            moment_start(&g)
        } else {
            [fit.k, fit.a, fit.b]
        };
        match fit_grouped(&g, start) {
            Ok(f) => shapes.push(f.k),
            Err(_) => failed += 1,
        }
    }
    if shapes.len() < 2 {
        return Err(Error::Degenerate("too few successful bootstrap fits".into()));
    }
    shapes.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let pick = |q: f64| {
        let pos = q * (shapes.len() - 1) as f64;
        let (i, frac) = (pos.floor() as usize, pos.fract());
        let j = (i + 1).min(shapes.len() - 1);
        shapes[i] + frac * (shapes[j] - shapes[i])
    };
    Ok(ShapeInterval {
        level,
        lower: pick(tail),
        upper: pick(1.0 - tail),
        n_boot,
        failed,
    })
}

/// Maxima mapped to `z = 1 + k (x - a) / b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledMaxima {
    pub z: Vec<f64>,
    /// Indices whose `z <= 0`, i.e. outside the fitted support.
    pub out_of_support: Vec<usize>,
}

pub fn scale_maxima(maxima: &[f64], fit: &GevFit) -> ScaledMaxima {
    let z: Vec<f64> = maxima.iter().map(|&x| fit.z(x)).collect();
    let out_of_support = z
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= 0.0)
        .map(|(i, _)| i)
        .collect();
    ScaledMaxima { z, out_of_support }
}

/// Inverse of [`scale_maxima`]: `x = a + b (z - 1) / k`.
pub fn unscale_maxima(z: &[f64], fit: &GevFit) -> Vec<f64> {
    z.iter().map(|&v| fit.a + fit.b * (v - 1.0) / fit.k).collect()
}

/// Mean of the Fréchet law, `a + (b/k) (Gamma(1-k) - 1)`, finite for
/// `0 < k < 1`.
pub fn frechet_mean(fit: &GevFit) -> Result<f64> {
    if !(fit.k > 0.0) {
        return Err(Error::InvalidInput(format!(
            "k = {} is outside the Fréchet regime",
            fit.k
        )));
    }
    if fit.k >= 1.0 {
        return Err(Error::InvalidInput(format!(
            "mean is infinite for k = {} >= 1",
            fit.k
        )));
    }
    Ok(fit.a + fit.b / fit.k * (libm::tgamma(1.0 - fit.k) - 1.0))
}
