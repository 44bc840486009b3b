//! Record-age power law `P(r) = A r^-alpha` on a finite integer support.
//!
//! Two estimators are provided: a least-squares line through the log-binned
//! density, and the discrete maximum-likelihood estimate whose normalization
//! is the generalized harmonic number `A = 1 / H(n, alpha)`.

use serde::{Deserialize, Serialize};

use super::histogram::{AgeCounts, LogHistogram};
use super::regression::linear_fit;
use crate::error::{Error, Result};

/// Bracket searched by the MLE.
pub const MLE_ALPHA_MIN: f64 = 1.01;
pub const MLE_ALPHA_MAX: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    LogbinLeastSquares,
    DiscreteMle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub alpha_stderr: f64,
    pub r_min: u64,
    pub r_max_fit: u64,
    pub method: FitMethod,
    /// `1 / sum_{r=r_min}^{r_max_fit} r^-alpha`; equals `1 / H(r_max_fit, alpha)`
    /// when `r_min = 1`.
    pub normalization_a: f64,
    /// Ages (MLE) or occupied bins (least squares) used.
    pub n_used: u64,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// `sum_{r=1}^{n} r^-alpha`, added smallest term first.
pub fn harmonic_number(n: u64, alpha: f64) -> f64 {
    partial_zeta(1, n, alpha)
}

/// `sum_{r=lo}^{hi} r^-alpha`, added smallest term first for `alpha >= 0`.
pub fn partial_zeta(lo: u64, hi: u64, alpha: f64) -> f64 {
    (lo.max(1)..=hi).rev().map(|r| (r as f64).powf(-alpha)).sum()
}

/// Sums `r^-alpha * (1, ln r, ln^2 r)` over `lo..=hi`.
fn zeta_moments(lo: u64, hi: u64, alpha: f64) -> (f64, f64, f64) {
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for r in (lo..=hi).rev() {
        let l = (r as f64).ln();
        let w = (-alpha * l).exp();
        s0 += w;
        s1 += w * l;
        s2 += w * l * l;
    }
    (s0, s1, s2)
}

/// Least-squares line through `(ln center, ln density)` of the occupied
/// bins whose centers lie in `[r_lo, r_hi]`.
pub fn fit_power_law_ls(hist: &LogHistogram, r_lo: u64, r_hi: u64) -> Result<PowerLawFit> {
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for i in 0..hist.n_bins() {
        let c = hist.centers[i];
        if hist.counts[i] > 0 && c >= r_lo as f64 && c <= r_hi as f64 {
            x.push(c.ln());
            y.push(hist.density[i].ln());
        }
    }
    if x.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "least-squares power law needs 3 occupied bins in [{r_lo}, {r_hi}], found {}",
            x.len()
        )));
    }
    let line = linear_fit(&x, &y)?;
    let alpha = -line.slope;
    let mut warnings = Vec::new();
    if alpha <= 1.0 {
        warnings.push(format!("alpha = {alpha} <= 1 is not normalizable on an infinite support"));
    }
    Ok(PowerLawFit {
        alpha,
        alpha_stderr: line.slope_stderr,
        r_min: r_lo.max(1),
        r_max_fit: r_hi,
        method: FitMethod::LogbinLeastSquares,
        normalization_a: 1.0 / partial_zeta(r_lo.max(1), r_hi, alpha),
        n_used: x.len() as u64,
        converged: true,
        warnings,
    })
}

/// Discrete MLE for samples that must all lie in `[1, support_max]`.
pub fn fit_power_law_mle(ages: &[u64], support_max: u64) -> Result<PowerLawFit> {
    if ages.is_empty() {
        return Err(Error::Empty("power-law fit of no ages"));
    }
    if let Some(a) = ages.iter().find(|&&a| a == 0 || a > support_max) {
        return Err(Error::InvalidInput(format!(
            "age {a} outside support [1, {support_max}]"
        )));
    }
    fit_power_law_mle_counts(&AgeCounts::from_ages(ages), 1, support_max)
}

/// Discrete MLE of a power law truncated to `r_lo..=r_hi`, using only the
/// ages inside that range.
///
/// The log-likelihood is concave in alpha, so its score is decreasing and
/// the root is found by bisection on `[MLE_ALPHA_MIN, MLE_ALPHA_MAX]`. If the
/// score does not change sign the estimate is pinned at an end of the
/// bracket and [`Error::PowerLawNotConverged`] is returned.
pub fn fit_power_law_mle_counts(counts: &AgeCounts, r_lo: u64, r_hi: u64) -> Result<PowerLawFit> {
    let r_lo = r_lo.max(1);
    if r_hi < r_lo {
        return Err(Error::InvalidInput(format!("empty fit range [{r_lo}, {r_hi}]")));
    }
    let used = counts.restrict(r_lo, r_hi);
    let n = used.total();
    if n == 0 {
        return Err(Error::Empty("no ages inside the fit range"));
    }
    let nf = n as f64;
    let sum_log: f64 = used.iter().map(|(a, c)| c as f64 * (a as f64).ln()).sum();

    let score = |alpha: f64| {
        let (s0, s1, _) = zeta_moments(r_lo, r_hi, alpha);
        -sum_log + nf * s1 / s0
    };

    let (lo, hi) = (MLE_ALPHA_MIN, MLE_ALPHA_MAX);
    let (score_lo, score_hi) = (score(lo), score(hi));
    if score_lo <= 0.0 || score_hi >= 0.0 {
        return Err(Error::PowerLawNotConverged {
            lower: lo,
            upper: hi,
            score_lower: score_lo,
            score_upper: score_hi,
            pinned_alpha: if score_hi >= 0.0 { hi } else { lo },
        });
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if score(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-13 {
            break;
        }
    }
    let alpha = 0.5 * (a + b);
    let (s0, s1, s2) = zeta_moments(r_lo, r_hi, alpha);
    // Observed information: n * Var(ln r) under the fitted law.
    let var_log = s2 / s0 - (s1 / s0) * (s1 / s0);
    let mut warnings = Vec::new();
    let alpha_stderr = if n < 2 {
        warnings.push("single sample: standard error undefined".to_string());
        f64::INFINITY
    } else {
        1.0 / (nf * var_log).sqrt()
    };
    Ok(PowerLawFit {
        alpha,
        alpha_stderr,
        r_min: r_lo,
        r_max_fit: r_hi,
        method: FitMethod::DiscreteMle,
        normalization_a: 1.0 / s0,
        n_used: n,
        converged: true,
        warnings,
    })
}
