//! Maximum-likelihood fits of volatility-proxy and return densities from
//! daily closing prices.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::DensityFamily;
use crate::diagnostics::Warning;
use crate::error::{Error, Result};
use crate::estimators::{Binning, EmpiricalDensity};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::stats::{quantile_sorted, sample_moments, SampleMoments};

/// Shortest price series accepted by `PriceSeries::new`, and the sample
/// count below which fits carry a low-statistics warning.
pub const MIN_SERIES_LEN: usize = 30;
/// Non-overlapping windows wanted per horizon in `multi_horizon_densities`.
pub const MIN_WINDOWS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    symbol: String,
    dates: Vec<NaiveDate>,
    closes: Vec<f64>,
}

impl PriceSeries {
    pub fn new(symbol: impl Into<String>, dates: Vec<NaiveDate>, closes: Vec<f64>) -> Result<Self> {
        if dates.len() != closes.len() {
            return Err(Error::InvalidSeries(format!(
                "{} dates but {} closes",
                dates.len(),
                closes.len()
            )));
        }
        if closes.len() < MIN_SERIES_LEN {
            return Err(Error::InvalidSeries(format!(
                "need >= {MIN_SERIES_LEN} prices, got {}",
                closes.len()
            )));
        }
        if let Some(i) = dates.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSeries(format!(
                "dates not strictly increasing at {} -> {}",
                dates[i],
                dates[i + 1]
            )));
        }
        if let Some(i) = closes.iter().position(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidSeries(format!("close on {} is not a positive number", dates[i])));
        }
        Ok(Self { symbol: symbol.into(), dates, closes })
    }

    /// Closes on consecutive calendar days starting at `start`.
    pub fn from_closes(symbol: impl Into<String>, start: NaiveDate, closes: Vec<f64>) -> Result<Self> {
        let dates = start.iter_days().take(closes.len()).collect();
        Self::new(symbol, dates, closes)
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn closes(&self) -> &[f64] {
        &self.closes
    }

    pub fn len(&self) -> usize {
        self.closes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closes.is_empty()
    }
}

/// Daily log-returns minus their sample mean.
pub fn detrended_returns_from_closes(closes: &[f64]) -> Result<Vec<f64>> {
    if closes.len() < 2 {
        return Err(Error::InsufficientData(format!("need >= 2 closes, got {}", closes.len())));
    }
    let mut r = Vec::with_capacity(closes.len() - 1);
    for (i, w) in closes.windows(2).enumerate() {
        let ratio = w[1] / w[0];
        if !(ratio > 0.0 && ratio.is_finite()) {
            return Err(Error::InvalidSeries(format!("non-positive price ratio at index {}", i + 1)));
        }
        r.push(ratio.ln());
    }
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    r.iter_mut().for_each(|v| *v -= mean);
    Ok(r)
}

/// |r_i − mean(r)| for daily log-returns r, in daily units.
pub fn volatility_proxy_from_closes(closes: &[f64]) -> Result<Vec<f64>> {
    Ok(detrended_returns_from_closes(closes)?.into_iter().map(f64::abs).collect())
}

pub fn volatility_proxy(prices: &PriceSeries) -> Result<Vec<f64>> {
    volatility_proxy_from_closes(prices.closes())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Normal,
    Gamma,
    LogNormal,
    StudentT,
}

impl FamilyKind {
    pub const VOLATILITY: [FamilyKind; 3] = [FamilyKind::Normal, FamilyKind::Gamma, FamilyKind::LogNormal];
    pub const RETURNS: [FamilyKind; 2] = [FamilyKind::Normal, FamilyKind::StudentT];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Normal => "normal",
            FamilyKind::Gamma => "gamma",
            FamilyKind::LogNormal => "log_normal",
            FamilyKind::StudentT => "student_t",
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            FamilyKind::StudentT => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "normal" | "gaussian" => Ok(FamilyKind::Normal),
            "gamma" => Ok(FamilyKind::Gamma),
            "log_normal" | "lognormal" => Ok(FamilyKind::LogNormal),
            "student_t" | "studentt" | "t" => Ok(FamilyKind::StudentT),
            other => Err(Error::InvalidParams(format!("unknown density family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub family: DensityFamily,
    pub loglik: f64,
    pub n_samples: usize,
    pub converged: bool,
    pub n_evals: usize,
    /// 2k − 2·loglik.
    pub aic: f64,
    pub warnings: Vec<Warning>,
}

impl FitResult {
    pub fn kind(&self) -> FamilyKind {
        match self.family {
            DensityFamily::Normal { .. } => FamilyKind::Normal,
            DensityFamily::Gamma { .. } => FamilyKind::Gamma,
            DensityFamily::LogNormal { .. } => FamilyKind::LogNormal,
            DensityFamily::StudentT { .. } => FamilyKind::StudentT,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit results serialize")
    }
}

pub fn loglik(family: &DensityFamily, samples: &[f64]) -> f64 {
    family.log_likelihood(samples)
}

pub fn fit_mle(kind: FamilyKind, samples: &[f64]) -> Result<FitResult> {
    fit_mle_with(kind, samples, &NelderMeadOptions::default())
}

/// Maximum-likelihood fit. Normal is closed form; the other families run
/// Nelder–Mead over log-transformed positive parameters from a
/// moment-matched start. A budget overrun returns the best point found
/// with `converged = false`.
pub fn fit_mle_with(kind: FamilyKind, samples: &[f64], options: &NelderMeadOptions) -> Result<FitResult> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!("need >= 2 samples to fit, got {}", samples.len())));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParams("non-finite sample".into()));
    }
    let mut warnings = Vec::new();
    if samples.len() < MIN_SERIES_LEN {
        warnings.push(Warning::LowStatistics {
            what: format!("{kind} fit samples"),
            have: samples.len(),
            recommended: MIN_SERIES_LEN,
        });
    }
    if matches!(kind, FamilyKind::Gamma | FamilyKind::LogNormal) {
        if let Some(x) = samples.iter().find(|&&x| x <= 0.0) {
            return Err(Error::DomainError {
                family: kind.name(),
                detail: format!("support is x > 0, found {x}"),
            });
        }
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var_mle = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    if !(var_mle > 0.0) {
        return Err(Error::DomainError { family: kind.name(), detail: "samples have zero spread".into() });
    }

    let (family, converged, n_evals) = match kind {
        FamilyKind::Normal => (DensityFamily::normal(mean, var_mle.sqrt())?, true, 0),
        _ => {
            let start = starting_point(kind, samples, mean, var_mle);
            let objective = |p: &[f64]| -loglik(&from_internal(kind, p), samples) / n;
            let out = nelder_mead(objective, &start, options)?;
            (from_internal(kind, &out.argmin), out.converged, out.n_evals)
        }
    };
    let ll = loglik(&family, samples);
    Ok(FitResult {
        family,
        loglik: ll,
        n_samples: samples.len(),
        converged,
        n_evals,
        aic: 2.0 * kind.param_count() as f64 - 2.0 * ll,
        warnings,
    })
}

/// Optimizer coordinates: (ln shape, ln scale), (μ, ln σ), and
/// (location, ln scale, ln(dof − 0.5)).
fn from_internal(kind: FamilyKind, p: &[f64]) -> DensityFamily {
    match kind {
        FamilyKind::Normal => DensityFamily::Normal { mean: p[0], std: p[1].exp() },
        FamilyKind::Gamma => DensityFamily::Gamma { shape: p[0].exp(), scale: p[1].exp() },
        FamilyKind::LogNormal => DensityFamily::LogNormal { log_mean: p[0], log_std: p[1].exp() },
        FamilyKind::StudentT => DensityFamily::StudentT {
            location: p[0],
            scale: p[1].exp(),
            dof: 0.5 + p[2].exp(),
        },
    }
}

fn starting_point(kind: FamilyKind, samples: &[f64], mean: f64, var: f64) -> Vec<f64> {
    match kind {
        FamilyKind::Normal => vec![mean, 0.5 * var.ln()],
        FamilyKind::Gamma => vec![(mean * mean / var).ln(), (var / mean).ln()],
        FamilyKind::LogNormal => {
            let s2 = (1.0 + var / (mean * mean)).ln();
            vec![mean.ln() - 0.5 * s2, 0.5 * s2.ln()]
        }
        FamilyKind::StudentT => {
            let mut sorted = samples.to_vec();
            sorted.sort_by(f64::total_cmp);
            let median = quantile_sorted(&sorted, 0.5);
            let excess = sample_moments(samples).map(|m| m.excess_kurtosis).unwrap_or(0.0);
            // excess kurtosis of Student-t is 6/(ν − 4)
            let dof = if excess > 0.0 { (4.0 + 6.0 / excess).clamp(2.5, 100.0) } else { 30.0 };
            let scale = (var * (dof - 2.0) / dof).sqrt();
            vec![median, scale.ln(), (dof - 0.5).ln()]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitFailure {
    pub family: FamilyKind,
    pub error: String,
}

/// Successful fits sorted by log-likelihood (best first) plus the families
/// that failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub ranked: Vec<FitResult>,
    pub failures: Vec<FitFailure>,
}

impl FitReport {
    pub fn best(&self) -> Option<&FitResult> {
        self.ranked.first()
    }

    pub fn get(&self, kind: FamilyKind) -> Option<&FitResult> {
        self.ranked.iter().find(|r| r.kind() == kind)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit reports serialize")
    }
}

/// Fits every family in `kinds` independently; a failing family is
/// reported and the others continue.
pub fn fit_all(kinds: &[FamilyKind], samples: &[f64]) -> FitReport {
    let outcomes: Vec<(FamilyKind, Result<FitResult>)> =
        kinds.par_iter().map(|&k| (k, fit_mle(k, samples))).collect();
    let mut ranked = Vec::new();
    let mut failures = Vec::new();
    for (family, outcome) in outcomes {
        match outcome {
            Ok(fit) => ranked.push(fit),
            Err(e) => failures.push(FitFailure { family, error: e.to_string() }),
        }
    }
    ranked.sort_by(|a, b| b.loglik.total_cmp(&a.loglik));
    FitReport { ranked, failures }
}

/// Normal, Gamma and Log-normal fits of the absolute-return proxy.
pub fn fit_volatility_all(prices: &PriceSeries) -> Result<FitReport> {
    Ok(fit_all(&FamilyKind::VOLATILITY, &volatility_proxy(prices)?))
}

/// Fits of the detrended daily log-returns.
pub fn fit_returns(prices: &PriceSeries, families: &[FamilyKind]) -> Result<FitReport> {
    Ok(fit_all(families, &detrended_returns_from_closes(prices.closes())?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonDensity {
    /// Window length in days.
    pub horizon: usize,
    pub density: EmpiricalDensity,
    pub moments: SampleMoments,
    pub overlapping: bool,
    /// Count of independent windows the sample is worth, (n − 1)/h when
    /// windows overlap.
    pub effective_samples: f64,
}

/// Densities of h-day zero-mean log-returns. Windows do not overlap when at
/// least `MIN_WINDOWS` fit in the series; otherwise every start day is used
/// and an `OverlappingWindows` warning is attached.
pub fn multi_horizon_densities(prices: &PriceSeries, horizons: &[usize]) -> Result<Vec<HorizonDensity>> {
    multi_horizon_from_closes(prices.closes(), horizons)
}

pub fn multi_horizon_from_closes(closes: &[f64], horizons: &[usize]) -> Result<Vec<HorizonDensity>> {
    let daily = detrended_returns_from_closes(closes)?;
    let n = daily.len();
    horizons
        .par_iter()
        .map(|&h| {
            if h == 0 {
                return Err(Error::InvalidParams("horizon must be >= 1 day".into()));
            }
            if h > n {
                return Err(Error::InsufficientData(format!("horizon {h} exceeds the {n} available returns")));
            }
            let overlapping = n / h < MIN_WINDOWS;
            let step = if overlapping { 1 } else { h };
            let windows: Vec<f64> = (0..=n - h).step_by(step).map(|i| daily[i..i + h].iter().sum()).collect();
            if windows.len() < 4 {
                return Err(Error::InsufficientData(format!(
                    "only {} windows of {h} days",
                    windows.len()
                )));
            }
            let mut density = EmpiricalDensity::histogram(&windows, Binning::FreedmanDiaconis)?;
            let effective_samples = n as f64 / h as f64;
            if overlapping {
                density.warnings.push(Warning::OverlappingWindows { horizon: h, effective_samples });
            }
            Ok(HorizonDensity {
                horizon: h,
                moments: sample_moments(&windows)?,
                density,
                overlapping,
                effective_samples: if overlapping { effective_samples } else { windows.len() as f64 },
            })
        })
        .collect()
}
