use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AllanOptions {
    /// Use every start index instead of disjoint averaging windows.
    pub overlapping: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllanResult {
    /// Averaging times at octave spacing.
    pub taus: Vec<f64>,
    pub variances: Vec<f64>,
    /// Number of differences entering each variance.
    pub counts: Vec<usize>,
    /// Averaging time with the smallest variance.
    pub minimum_tau: f64,
}

impl AllanResult {
    /// Least-squares slope of `log sigma^2` against `log tau` over entries
    /// whose tau lies in `[tau_lo, tau_hi]`.
    pub fn loglog_slope(&self, tau_lo: f64, tau_hi: f64) -> Result<f64> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .taus
            .iter()
            .zip(&self.variances)
            .filter(|(t, v)| **t >= tau_lo && **t <= tau_hi && **v > 0.0)
            .map(|(t, v)| (t.ln(), v.ln()))
            .unzip();
        if xs.len() < 2 {
            return Err(Error::arg("fewer than two taus in the slope range"));
        }
        let w = vec![1.0; xs.len()];
        Ok(super::noise_temp::weighted_line(&xs, &ys, &w).1)
    }
}

/// Non-overlapping two-sample Allan variance at octave-spaced averaging
/// factors.
pub fn allan_variance(series: &[f64], readout_interval: f64) -> Result<AllanResult> {
    allan_variance_with(series, readout_interval, AllanOptions::default())
}

pub fn allan_variance_with(
    series: &[f64],
    readout_interval: f64,
    options: AllanOptions,
) -> Result<AllanResult> {
    if series.len() < 16 {
        return Err(Error::arg(format!(
            "Allan variance needs at least 16 readouts, got {}",
            series.len()
        )));
    }
    if !(readout_interval > 0.0) {
        return Err(Error::arg("readout_interval must be > 0"));
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::arg("series contains non-finite values"));
    }
    let n = series.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for x in series {
        prefix.push(prefix.last().unwrap() + x);
    }
    let mean = |start: usize, m: usize| (prefix[start + m] - prefix[start]) / m as f64;

    let mut taus = Vec::new();
    let mut variances = Vec::new();
    let mut counts = Vec::new();
    let mut m = 1;
    while 2 * m <= n {
        let (sum, count) = if options.overlapping {
            let count = n - 2 * m + 1;
            let sum: f64 = (0..count)
                .map(|i| (mean(i + m, m) - mean(i, m)).powi(2))
                .sum();
            (sum, count)
        } else {
            let blocks = n / m;
            let sum: f64 = (0..blocks - 1)
                .map(|j| (mean((j + 1) * m, m) - mean(j * m, m)).powi(2))
                .sum();
            (sum, blocks - 1)
        };
        taus.push(m as f64 * readout_interval);
        variances.push(sum / (2.0 * count as f64));
        counts.push(count);
        m *= 2;
    }
    let best = variances
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(AllanResult {
        minimum_tau: taus[best],
        taus,
        variances,
        counts,
    })
}
