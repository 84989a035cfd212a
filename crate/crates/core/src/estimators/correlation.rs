//! Leverage and volatility-autocorrelation estimators with moving-block
//! bootstrap standard errors.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::ReturnSeries;
use crate::diagnostics::Warning;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::textfmt::fmt_f64;

pub const DEFAULT_RESAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationOptions {
    /// Largest lag in steps. Lags run 1..=max_lag.
    pub max_lag: usize,
    /// Bootstrap block length in steps; `None` uses 2·max_lag.
    pub block_len: Option<usize>,
    pub n_resamples: usize,
    pub seed: u64,
    /// Multiplier applied to leverage values and their standard errors.
    /// Autocorrelation ignores it.
    pub leverage_scale: f64,
}

impl CorrelationOptions {
    pub fn new(max_lag: usize) -> Self {
        Self { max_lag, block_len: None, n_resamples: DEFAULT_RESAMPLES, seed: 0, leverage_scale: 1.0 }
    }

    /// Blocks of 10 relaxation times 1/α, measured in steps of `dt`, so the
    /// resampled squared increments keep the volatility memory.
    ///
    /// Leverage does not need this: each summand carries the martingale
    /// factor dx(t), so summands decorrelate beyond the lag window and the
    /// default 2·max_lag blocks give many more blocks and steadier errors.
    pub fn for_autocorr(params: &ModelParams, dt: f64, max_lag: usize) -> Self {
        let block = (10.0 / (params.alpha * dt)).ceil().max(1.0) as usize;
        Self { block_len: Some(block), ..Self::new(max_lag) }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_leverage_scale(mut self, scale: f64) -> Self {
        self.leverage_scale = scale;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationCurve {
    pub lags: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub warnings: Vec<Warning>,
}

impl CorrelationCurve {
    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }

    /// Fraction of lags where |value − target(τ)| ≤ n_se·stderr.
    pub fn coverage(&self, target: impl Fn(f64) -> f64, n_se: f64) -> f64 {
        let hits = (0..self.len())
            .filter(|&i| (self.values[i] - target(self.lags[i])).abs() <= n_se * self.stderr[i])
            .count();
        hits as f64 / self.len() as f64
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "lag,value,stderr")?;
        for i in 0..self.len() {
            writeln!(w, "{},{},{}", fmt_f64(self.lags[i]), fmt_f64(self.values[i]), fmt_f64(self.stderr[i]))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the first three columns; any further columns are ignored.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut curve = Self { lags: vec![], values: vec![], stderr: vec![], warnings: vec![] };
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim().starts_with("lag,value,stderr") => {}
            _ => return Err(Error::Format("expected header 'lag,value,stderr'".into())),
        }
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let v: Vec<f64> = line
                .split(',')
                .take(3)
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Format(format!("line {}: bad number", i + 2)))?;
            if v.len() != 3 {
                return Err(Error::Format(format!("line {}: expected 3 columns", i + 2)));
            }
            curve.lags.push(v[0]);
            curve.values.push(v[1]);
            curve.stderr.push(v[2]);
        }
        Ok(curve)
    }
}

#[derive(Clone, Copy)]
enum Statistic {
    Leverage,
    Autocorr,
}

/// E[dx(t+j)²·dx(t)] / E[dx²]², times `options.leverage_scale`.
pub fn estimate_leverage(series: &ReturnSeries, options: &CorrelationOptions) -> Result<CorrelationCurve> {
    estimate(series, options, Statistic::Leverage)
}

/// (E[dx²(t)·dx²(t+j)] − E[dx²]²) / (E[dx⁴] − E[dx²]²).
pub fn estimate_autocorr(series: &ReturnSeries, options: &CorrelationOptions) -> Result<CorrelationCurve> {
    estimate(series, options, Statistic::Autocorr)
}

fn estimate(series: &ReturnSeries, options: &CorrelationOptions, stat: Statistic) -> Result<CorrelationCurve> {
    let n = series.len();
    let max_lag = options.max_lag;
    if max_lag == 0 {
        return Err(Error::InvalidParams("max_lag must be >= 1".into()));
    }
    if n < 2 * max_lag {
        return Err(Error::InsufficientData(format!(
            "series of {n} increments is shorter than 2*max_lag = {}",
            2 * max_lag
        )));
    }
    let mut warnings = Vec::new();
    if n < 10 * max_lag {
        warnings.push(Warning::LowStatistics {
            what: "series length vs max_lag".into(),
            have: n,
            recommended: 10 * max_lag,
        });
    }
    let dx = series.dx();
    let sq: Vec<f64> = dx.iter().map(|v| v * v).collect();

    let block = options.block_len.unwrap_or(2 * max_lag).clamp(1, n);
    let n_blocks = n.div_ceil(block);
    if n_blocks < 10 {
        warnings.push(Warning::LowStatistics {
            what: "bootstrap blocks".into(),
            have: n_blocks,
            recommended: 10,
        });
    }

    // block starts for every resample; one seeded stream per resample
    let starts: Vec<Vec<usize>> = (0..options.n_resamples)
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            rng.set_stream(b as u64);
            (0..n_blocks).map(|_| rng.random_range(0..=n - block)).collect()
        })
        .collect();

    let sq_prefix = prefix(&sq);
    let quad_prefix = prefix(&sq.iter().map(|s| s * s).collect::<Vec<_>>());
    let block_moments: Vec<(f64, f64)> = starts
        .iter()
        .map(|st| {
            let cnt = (st.len() * block) as f64;
            let s1: f64 = st.iter().map(|&s| sq_prefix[s + block] - sq_prefix[s]).sum();
            let s2: f64 = st.iter().map(|&s| quad_prefix[s + block] - quad_prefix[s]).sum();
            (s1 / cnt, s2 / cnt)
        })
        .collect();
    let full_m1 = sq_prefix[n] / n as f64;
    let full_m2 = quad_prefix[n] / n as f64;

    let finish = |cross: f64, m1: f64, m2: f64| match stat {
        Statistic::Leverage => options.leverage_scale * cross / (m1 * m1),
        Statistic::Autocorr => (cross - m1 * m1) / (m2 - m1 * m1),
    };

    let per_lag: Vec<(f64, f64)> = (1..=max_lag)
        .into_par_iter()
        .map(|j| {
            let valid = n - j;
            let cross: Vec<f64> = match stat {
                Statistic::Leverage => (0..valid).map(|t| sq[t + j] * dx[t]).collect(),
                Statistic::Autocorr => (0..valid).map(|t| sq[t] * sq[t + j]).collect(),
            };
            let cp = prefix(&cross);
            let value = finish(cp[valid] / valid as f64, full_m1, full_m2);

            let mut reps = Vec::with_capacity(starts.len());
            for (st, &(m1, m2)) in starts.iter().zip(&block_moments) {
                let (mut sum, mut cnt) = (0.0, 0usize);
                for &s in st {
                    if s < valid {
                        let e = (s + block).min(valid);
                        sum += cp[e] - cp[s];
                        cnt += e - s;
                    }
                }
                if cnt > 0 {
                    reps.push(finish(sum / cnt as f64, m1, m2));
                }
            }
            (value, std_dev(&reps))
        })
        .collect();

    let dt = series.dt();
    Ok(CorrelationCurve {
        lags: (1..=max_lag).map(|j| j as f64 * dt).collect(),
        values: per_lag.iter().map(|p| p.0).collect(),
        stderr: per_lag.iter().map(|p| p.1).collect(),
        warnings,
    })
}

fn prefix(v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len() + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for x in v {
        acc += x;
        out.push(acc);
    }
    out
}

fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}
