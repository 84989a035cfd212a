//! Sample statistics and goodness-of-fit helpers.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleMoments {
    pub n: usize,
    pub mean: f64,
    /// Unbiased (n − 1) variance.
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

/// Mean and unbiased variance; needs at least two samples.
pub fn mean_variance(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need >= 2 samples for a variance, got {}",
            samples.len()
        )));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    Ok((mean, ss / (n - 1.0)))
}

/// Mean, unbiased variance, and the standardized third and fourth central
/// moments (m₃/m₂^{3/2}, m₄/m₂² − 3, with biased m₂).
pub fn sample_moments(samples: &[f64]) -> Result<SampleMoments> {
    if samples.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "need >= 4 samples for moments, got {}",
            samples.len()
        )));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let variance = m2 / (n - 1.0);
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    Ok(SampleMoments { n: samples.len(), mean, variance, skewness, excess_kurtosis })
}

/// Two-sided Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic survival function of the Kolmogorov distribution,
/// P(√n·D > λ) = 2 Σ (−1)^{j−1} e^{−2j²λ²}.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        let term = (-2.0 * j * j * lambda * lambda).exp();
        sum += if j as i64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// p-value of a KS statistic `d` from `n` samples, with the Stephens
/// small-sample correction λ = (√n + 0.12 + 0.11/√n)·d.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

impl KsOutcome {
    pub fn passes(&self, level: f64) -> bool {
        self.p_value >= level
    }
}

pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> KsOutcome {
    let statistic = ks_statistic(samples, cdf);
    KsOutcome { statistic, p_value: ks_p_value(statistic, samples.len()), n: samples.len() }
}

/// Standard error of the mean of a serially correlated series from
/// non-overlapping batch means. Trailing samples that do not fill a batch
/// are dropped.
pub fn batch_mean_stderr(series: &[f64], batch_len: usize) -> Result<f64> {
    let batch_len = batch_len.max(1);
    let n_batches = series.len() / batch_len;
    if n_batches < 2 {
        return Err(Error::InsufficientData(format!(
            "need >= 2 batches of {batch_len}, series has {}",
            series.len()
        )));
    }
    let means: Vec<f64> = series
        .chunks_exact(batch_len)
        .map(|c| c.iter().sum::<f64>() / batch_len as f64)
        .collect();
    let (_, var) = mean_variance(&means)?;
    Ok((var / n_batches as f64).sqrt())
}

/// Linear-interpolated quantile of already sorted data, `q` in [0, 1].
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}
