//! Euler-Maruyama Monte Carlo engine for the coupled (X, Y) system.
//!
//! Each path draws from its own [`GaussianStream`] (master seed, stream =
//! path index), so a [`PathSet`] is bit-identical for a given seed whatever
//! the size of the rayon pool.

mod io;
mod noise;

use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::Warning;
use crate::error::{Error, Result};
use crate::model::{ModelKind, ModelParams, SdeCoefficients};

pub use io::{PATHSET_MAGIC, PATHSET_VERSION};
pub use noise::{correlated_increments, GaussianStream, NoiseSource, WienerPair, ZeroNoise};

/// Trading days per year used to size long series.
pub const TRADING_DAYS_PER_YEAR: f64 = 252.0;

/// Above this value of α·Δt the step is flagged as coarse.
pub const MAX_ALPHA_DT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    /// Time step, in the same unit as the model rates.
    pub dt: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    /// Store every `record_stride`-th step (step 0 is always stored).
    pub record_stride: usize,
}

impl PathConfig {
    pub fn new(dt: f64, n_steps: usize, n_paths: usize, seed: u64) -> Self {
        Self { dt, n_steps, n_paths, seed, record_stride: 1 }
    }

    pub fn with_stride(mut self, record_stride: usize) -> Self {
        self.record_stride = record_stride;
        self
    }

    pub fn validate(&self, params: &ModelParams) -> Result<Vec<Warning>> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParams(format!("dt must be > 0 (got {})", self.dt)));
        }
        if self.n_steps == 0 || self.n_paths == 0 || self.record_stride == 0 {
            return Err(Error::InvalidParams(
                "n_steps, n_paths and record_stride must all be >= 1".into(),
            ));
        }
        let mut warnings = params.validate()?;
        let alpha_dt = params.alpha * self.dt;
        if alpha_dt > MAX_ALPHA_DT {
            warnings.push(Warning::CoarseTimeStep { alpha_dt });
        }
        Ok(warnings)
    }

    /// Recorded points per path: steps 0, s, 2s, … up to `n_steps`.
    pub fn n_recorded(&self) -> usize {
        self.n_steps / self.record_stride + 1
    }
}

/// How Y(0) is chosen for each path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Every path starts at `params.y0`.
    #[default]
    Fixed,
    /// Y(0) drawn from the stationary law of the driving process.
    Stationary,
}

/// One Euler-Maruyama step of the coupled system.
pub fn euler_step(coeffs: &SdeCoefficients, state: (f64, f64), dt: f64, w: WienerPair) -> Result<(f64, f64)> {
    let (x, y) = state;
    let x_next = x + coeffs.vol_map(y) * w.dw1();
    let y_next = y + coeffs.drift_y(y) * dt + coeffs.diff_y(y) * w.dw2();
    if x_next.is_finite() && y_next.is_finite() {
        Ok((x_next, y_next))
    } else {
        Err(Error::NonFiniteState { path: None, step: None, x: x_next, y: y_next })
    }
}

/// Draws Y from the stationary law of the driving process.
pub fn draw_stationary_y(params: &ModelParams, stream: &mut GaussianStream) -> f64 {
    match params.kind {
        ModelKind::Vasicek => params.m + params.beta().sqrt() * stream.standard_normal(),
        ModelKind::ExpOu => params.beta().sqrt() * stream.standard_normal(),
        ModelKind::Heston => {
            let shape = 2.0 * params.alpha * params.m / (params.k * params.k);
            let scale = params.beta();
            // shape and scale are positive for validated params
            Gamma::new(shape, scale).expect("valid gamma law").sample(stream.rng())
        }
    }
}

/// Ensemble of recorded trajectories, stored path-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    config: PathConfig,
    params: ModelParams,
    n_recorded: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    integrated_var: Vec<f64>,
}

impl PathSet {
    pub(crate) fn from_parts(
        config: PathConfig,
        params: ModelParams,
        x: Vec<f64>,
        y: Vec<f64>,
        integrated_var: Vec<f64>,
    ) -> Result<Self> {
        let n_recorded = config.n_recorded();
        let len = config.n_paths * n_recorded;
        if x.len() != len || y.len() != len || integrated_var.len() != len {
            return Err(Error::Format(format!(
                "expected {len} values per column, got {}/{}/{}",
                x.len(),
                y.len(),
                integrated_var.len()
            )));
        }
        Ok(Self { config, params, n_recorded, x, y, integrated_var })
    }

    pub fn config(&self) -> &PathConfig {
        &self.config
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn n_paths(&self) -> usize {
        self.config.n_paths
    }

    pub fn n_recorded(&self) -> usize {
        self.n_recorded
    }

    /// Simulation step index of recorded point `i`.
    pub fn step_of(&self, i: usize) -> usize {
        i * self.config.record_stride
    }

    pub fn time_of(&self, i: usize) -> f64 {
        self.step_of(i) as f64 * self.config.dt
    }

    pub fn x(&self, path: usize) -> &[f64] {
        &self.x[path * self.n_recorded..(path + 1) * self.n_recorded]
    }

    pub fn y(&self, path: usize) -> &[f64] {
        &self.y[path * self.n_recorded..(path + 1) * self.n_recorded]
    }

    /// Cumulative Σσ²Δt up to each recorded point.
    pub fn integrated_var(&self, path: usize) -> &[f64] {
        &self.integrated_var[path * self.n_recorded..(path + 1) * self.n_recorded]
    }

    /// σ at each recorded point of a path.
    pub fn sigma(&self, path: usize) -> Vec<f64> {
        let c = self.coefficients();
        self.y(path).iter().map(|&y| c.vol_map(y)).collect()
    }

    /// Cross-section of X at recorded point `i`, one value per path.
    pub fn x_at(&self, i: usize) -> Vec<f64> {
        (0..self.n_paths()).map(|p| self.x(p)[i]).collect()
    }

    /// Cross-section of Y at recorded point `i`, one value per path.
    pub fn y_at(&self, i: usize) -> Vec<f64> {
        (0..self.n_paths()).map(|p| self.y(p)[i]).collect()
    }

    /// Prices reconstructed from X, μ and the integrated variance.
    pub fn prices(&self, path: usize) -> Vec<f64> {
        let p = &self.params;
        self.x(path)
            .iter()
            .zip(self.integrated_var(path))
            .enumerate()
            .map(|(i, (&x, &iv))| p.s0 * (p.mu * self.time_of(i) - 0.5 * iv + x).exp())
            .collect()
    }

    fn coefficients(&self) -> SdeCoefficients {
        self.params.coefficients().expect("path set params were validated")
    }
}

/// Runs one path into the given record buffers.
#[allow(clippy::too_many_arguments)]
pub fn simulate_path_into<N: NoiseSource + ?Sized>(
    coeffs: &SdeCoefficients,
    rho: f64,
    config: &PathConfig,
    y_start: f64,
    noise: &mut N,
    x_out: &mut [f64],
    y_out: &mut [f64],
    iv_out: &mut [f64],
) -> Result<()> {
    let dt = config.dt;
    let stride = config.record_stride;
    let (mut x, mut y, mut iv) = (0.0, y_start, 0.0);
    x_out[0] = x;
    y_out[0] = y;
    iv_out[0] = iv;
    for step in 1..=config.n_steps {
        let w = correlated_increments(rho, dt, noise);
        iv += coeffs.variance_rate(y) * dt;
        (x, y) = euler_step(coeffs, (x, y), dt, w).map_err(|e| match e {
            Error::NonFiniteState { x, y, .. } => {
                Error::NonFiniteState { path: None, step: Some(step), x, y }
            }
            other => other,
        })?;
        if step % stride == 0 {
            let i = step / stride;
            x_out[i] = x;
            y_out[i] = y;
            iv_out[i] = iv;
        }
    }
    Ok(())
}

pub fn simulate_paths(params: &ModelParams, config: &PathConfig) -> Result<PathSet> {
    simulate_paths_from(params, config, InitialState::Fixed)
}

/// Simulates `config.n_paths` independent paths in parallel.
pub fn simulate_paths_from(params: &ModelParams, config: &PathConfig, init: InitialState) -> Result<PathSet> {
    config.validate(params)?;
    let coeffs = params.coefficients()?;
    let n_rec = config.n_recorded();
    let len = config.n_paths * n_rec;
    let mut x = vec![0.0; len];
    let mut y = vec![0.0; len];
    let mut iv = vec![0.0; len];

    let outcomes: Vec<Result<()>> = x
        .par_chunks_mut(n_rec)
        .zip(y.par_chunks_mut(n_rec))
        .zip(iv.par_chunks_mut(n_rec))
        .enumerate()
        .map(|(path, ((xs, ys), ivs))| {
            let mut stream = GaussianStream::new(config.seed, path as u64);
            let y_start = match init {
                InitialState::Fixed => params.y0,
                InitialState::Stationary => draw_stationary_y(params, &mut stream),
            };
            simulate_path_into(&coeffs, params.rho, config, y_start, &mut stream, xs, ys, ivs).map_err(
                |e| match e {
                    Error::NonFiniteState { step, x, y, .. } => {
                        Error::NonFiniteState { path: Some(path), step, x, y }
                    }
                    other => other,
                },
            )
        })
        .collect();
    if let Some(err) = outcomes.into_iter().find_map(|r| r.err()) {
        return Err(err);
    }
    PathSet::from_parts(*config, *params, x, y, iv)
}

/// One path covering `years` of trading at 252 days per year, every step
/// recorded. `dt` is in days.
pub fn single_long_series(params: &ModelParams, years: u32, dt: f64, seed: u64) -> Result<PathSet> {
    if years == 0 {
        return Err(Error::InvalidParams("years must be >= 1".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParams(format!("dt must be > 0 (got {dt})")));
    }
    let n_steps = (years as f64 * TRADING_DAYS_PER_YEAR / dt).round() as usize;
    simulate_paths(params, &PathConfig::new(dt, n_steps, 1, seed))
}
