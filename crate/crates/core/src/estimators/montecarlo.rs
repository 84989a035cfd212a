//! Monte Carlo return densities at a fixed horizon.

use super::cf::{empirical_cf_on_grid, invert_cf, FrequencyGrid, InversionOptions};
use super::density::{Binning, EmpiricalDensity};
use crate::diagnostics::Warning;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::simulate::{simulate_paths_from, InitialState, PathConfig};
use crate::stats::{sample_moments, SampleMoments};

/// Paths below which a density carries a low-statistics warning.
pub const MIN_PATHS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityMethod {
    Histogram(Binning),
    /// Empirical characteristic function on a grid of `points` frequencies,
    /// inverted by FFT.
    CharacteristicFunction { points: usize },
}

impl Default for DensityMethod {
    fn default() -> Self {
        DensityMethod::Histogram(Binning::FreedmanDiaconis)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnPdfOptions {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub method: DensityMethod,
}

impl ReturnPdfOptions {
    pub fn new(n_paths: usize, dt: f64, seed: u64) -> Self {
        Self { n_paths, dt, seed, method: DensityMethod::default() }
    }

    pub fn with_method(mut self, method: DensityMethod) -> Self {
        self.method = method;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPdf {
    pub density: EmpiricalDensity,
    pub moments: SampleMoments,
    /// X(horizon) for every path.
    pub samples: Vec<f64>,
}

/// X(horizon) across `n_paths` paths started from the stationary law of Y,
/// plus the configuration warnings. The horizon is rounded to whole steps
/// (at least one).
pub fn return_samples_mc(
    params: &ModelParams,
    horizon: f64,
    n_paths: usize,
    dt: f64,
    seed: u64,
) -> Result<(Vec<f64>, Vec<Warning>)> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParams(format!("horizon must be > 0 (got {horizon})")));
    }
    let n_steps = ((horizon / dt).round() as usize).max(1);
    let config = PathConfig::new(dt, n_steps, n_paths, seed).with_stride(n_steps);
    let warnings = config.validate(params)?;
    let paths = simulate_paths_from(params, &config, InitialState::Stationary)?;
    Ok((paths.x_at(1), warnings))
}

/// Density of X(horizon) with Y(0) drawn from its stationary law.
pub fn return_pdf_mc(params: &ModelParams, horizon: f64, options: &ReturnPdfOptions) -> Result<ReturnPdf> {
    let (samples, mut warnings) = return_samples_mc(params, horizon, options.n_paths, options.dt, options.seed)?;
    if options.n_paths < MIN_PATHS {
        warnings.push(Warning::LowStatistics {
            what: "Monte Carlo paths".into(),
            have: options.n_paths,
            recommended: MIN_PATHS,
        });
    }
    let mut density = match options.method {
        DensityMethod::Histogram(binning) => EmpiricalDensity::histogram(&samples, binning)?,
        DensityMethod::CharacteristicFunction { points } => {
            let grid = FrequencyGrid::for_samples(&samples, points)?;
            let phi = empirical_cf_on_grid(&samples, &grid)?;
            invert_cf(&phi, &grid, &InversionOptions::for_samples(&samples, 4.0 * grid.dx()))?
        }
    };
    warnings.append(&mut density.warnings);
    density.warnings = warnings;
    let moments = sample_moments(&samples)?;
    Ok(ReturnPdf { density, moments, samples })
}
