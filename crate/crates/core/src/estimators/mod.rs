//! Estimators over simulated or empirical return series.

mod cf;
mod correlation;
mod density;
mod montecarlo;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulate::PathSet;

pub use crate::stats::{sample_moments, SampleMoments};
pub use cf::{empirical_cf, empirical_cf_on_grid, invert_cf, FrequencyGrid, InversionOptions};
pub use correlation::{
    estimate_autocorr, estimate_leverage, CorrelationCurve, CorrelationOptions, DEFAULT_RESAMPLES,
};
pub use density::{Binning, EmpiricalDensity, MAX_BINS};
pub use montecarlo::{return_pdf_mc, return_samples_mc, DensityMethod, ReturnPdf, ReturnPdfOptions, MIN_PATHS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesOrigin {
    Simulated,
    Empirical,
}

/// Ordered per-step return increments dx.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    dx: Vec<f64>,
    dt: f64,
    origin: SeriesOrigin,
}

impl ReturnSeries {
    pub fn new(dx: Vec<f64>, dt: f64, origin: SeriesOrigin) -> Result<Self> {
        if dx.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "return series needs >= 2 increments, got {}",
                dx.len()
            )));
        }
        if let Some(i) = dx.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("non-finite increment at index {i}")));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidParams(format!("dt must be > 0 (got {dt})")));
        }
        Ok(Self { dx, dt, origin })
    }

    /// Increments of X between consecutive recorded points of one path.
    pub fn from_path(paths: &PathSet, path: usize) -> Result<Self> {
        let x = paths.x(path);
        let dx = x.windows(2).map(|w| w[1] - w[0]).collect();
        let dt = paths.config().dt * paths.config().record_stride as f64;
        Self::new(dx, dt, SeriesOrigin::Simulated)
    }

    pub fn dx(&self) -> &[f64] {
        &self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn origin(&self) -> SeriesOrigin {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.dx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dx.is_empty()
    }

    /// The same increments in reverse time order.
    pub fn reversed(&self) -> Self {
        let mut dx = self.dx.clone();
        dx.reverse();
        Self { dx, ..*self }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { dx: self.dx.iter().map(|v| v * c).collect(), ..*self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::simulate::{simulate_paths, PathConfig};

    #[test]
    fn series_from_path_uses_recorded_spacing() {
        let p = ModelParams::vasicek(1.0, 0.2, 0.1, 0.0);
        let ps = simulate_paths(&p, &PathConfig::new(0.01, 40, 1, 3).with_stride(4)).unwrap();
        let s = ReturnSeries::from_path(&ps, 0).unwrap();
        assert_eq!(s.len(), 10);
        assert!((s.dt() - 0.04).abs() < 1e-15);
        let total: f64 = s.dx().iter().sum();
        assert!((total - ps.x(0)[10]).abs() < 1e-12);
    }

    #[test]
    fn series_validation() {
        assert!(ReturnSeries::new(vec![1.0], 1.0, SeriesOrigin::Empirical).is_err());
        assert!(ReturnSeries::new(vec![1.0, f64::NAN], 1.0, SeriesOrigin::Empirical).is_err());
        assert!(ReturnSeries::new(vec![1.0, 2.0], 0.0, SeriesOrigin::Empirical).is_err());
        let s = ReturnSeries::new(vec![1.0, 2.0, 3.0], 1.0, SeriesOrigin::Empirical).unwrap();
        assert_eq!(s.reversed().dx(), &[3.0, 2.0, 1.0]);
    }
}
