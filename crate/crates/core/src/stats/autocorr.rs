use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocorrSeries {
    pub lags: Vec<usize>,
    pub values: Vec<f64>,
}

impl AutocorrSeries {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("lag\tautocorr\n");
        for (l, v) in self.lags.iter().zip(&self.values) {
            out.push_str(&format!("{l}\t{v}\n"));
        }
        out
    }
}

/// Mean-subtracted, variance-normalized autocorrelation
/// `C(tau) = sum_t (x_t - m)(x_{t+tau} - m) / sum_t (x_t - m)^2`
/// for `tau = 0..=tau_max`.
pub fn autocorrelation(xs: &[f64], tau_max: usize) -> Result<AutocorrSeries> {
    if tau_max < 1 || xs.len() <= tau_max {
        return Err(Error::InvalidInput(format!(
            "need 1 <= tau_max < len, got tau_max {tau_max} for len {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let dev: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let var: f64 = dev.iter().map(|d| d * d).sum();
    if var == 0.0 {
        return Err(Error::Degenerate("autocorrelation of a constant series".into()));
    }
    let mut values = Vec::with_capacity(tau_max + 1);
    values.push(1.0);
    for tau in 1..=tau_max {
        let s: f64 = dev.iter().zip(&dev[tau..]).map(|(a, b)| a * b).sum();
        values.push((s / var).clamp(-1.0, 1.0));
    }
    Ok(AutocorrSeries {
        lags: (0..=tau_max).collect(),
        values,
    })
}
