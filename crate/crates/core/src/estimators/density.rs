//! Densities tabulated on a uniform grid.

use std::io::{BufRead, Write};

use serde::Serialize;

use crate::diagnostics::Warning;
use crate::error::{Error, Result};
use crate::stats::quantile_sorted;
use crate::textfmt::fmt_f64;

/// Upper bound on histogram bins regardless of the binning rule.
pub const MAX_BINS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Binning {
    /// Width 2·IQR·n^{-1/3}.
    FreedmanDiaconis,
    Bins(usize),
    Width(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalDensity {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    /// Samples behind the estimate, 0 when built from an analytic transform.
    pub n_samples: usize,
    /// Grid spacing.
    pub bin_width: f64,
    /// Mass removed by clipping negative values to 0.
    pub clipped_mass: f64,
    pub warnings: Vec<Warning>,
}

impl EmpiricalDensity {
    /// Normalized histogram at bin centers, padded with an empty bin at each
    /// end so the trapezoid rule integrates to exactly 1.
    pub fn histogram(samples: &[f64], binning: Binning) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InsufficientData(format!("histogram needs >= 2 samples, got {}", samples.len())));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite sample".into()));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
        let range = hi - lo;
        let n = samples.len();

        let mut width = match binning {
            Binning::FreedmanDiaconis => {
                let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
                2.0 * iqr / (n as f64).cbrt()
            }
            Binning::Bins(b) if b > 0 => range / b as f64,
            Binning::Bins(_) => return Err(Error::InvalidParams("bin count must be >= 1".into())),
            Binning::Width(w) if w > 0.0 && w.is_finite() => w,
            Binning::Width(w) => return Err(Error::InvalidParams(format!("bin width must be > 0 (got {w})"))),
        };
        if !(width > 0.0) {
            // degenerate spread: all samples (nearly) equal
            width = if range > 0.0 { range } else { lo.abs().max(1.0) * 1e-6 };
        }
        let mut bins = ((range / width).ceil() as usize).max(1);
        if bins > MAX_BINS {
            bins = MAX_BINS;
            width = range / bins as f64;
        }
        let mut counts = vec![0usize; bins];
        for &v in &sorted {
            let b = (((v - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let scale = 1.0 / (n as f64 * width);
        let mut grid = Vec::with_capacity(bins + 2);
        let mut density = Vec::with_capacity(bins + 2);
        for b in 0..bins + 2 {
            grid.push(lo + (b as f64 - 0.5) * width);
            density.push(if b == 0 || b == bins + 1 { 0.0 } else { counts[b - 1] as f64 * scale });
        }
        Ok(Self { grid, density, n_samples: n, bin_width: width, clipped_mass: 0.0, warnings: vec![] })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Trapezoid integral of the density over the grid.
    pub fn trapezoid_mass(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(x, p)| 0.5 * (x[1] - x[0]) * (p[0] + p[1]))
            .sum()
    }

    /// Linear interpolation, 0 outside the grid.
    pub fn value_at(&self, x: f64) -> f64 {
        let (first, last) = (self.grid[0], self.grid[self.len() - 1]);
        if !(x >= first && x <= last) {
            return 0.0;
        }
        let pos = ((x - first) / self.bin_width).min((self.len() - 1) as f64);
        let i = (pos.floor() as usize).min(self.len() - 2);
        let frac = (x - self.grid[i]) / (self.grid[i + 1] - self.grid[i]);
        self.density[i] + frac * (self.density[i + 1] - self.density[i])
    }

    pub fn peak(&self) -> f64 {
        self.density.iter().cloned().fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,density")?;
        for (x, p) in self.grid.iter().zip(&self.density) {
            writeln!(w, "{},{}", fmt_f64(*x), fmt_f64(*p))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the `x,density` leading columns; further columns are ignored.
    /// Sample count and warnings are not stored in the CSV.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim().starts_with("x,density") => {}
            _ => return Err(Error::Format("expected header 'x,density'".into())),
        }
        let (mut grid, mut density) = (Vec::new(), Vec::new());
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::Format(format!("line {}: expected 'x,density'", i + 2));
            let mut cols = line.split(',');
            let (a, b) = (cols.next().ok_or_else(bad)?, cols.next().ok_or_else(bad)?);
            grid.push(a.trim().parse::<f64>().map_err(|_| bad())?);
            density.push(b.trim().parse::<f64>().map_err(|_| bad())?);
        }
        if grid.len() < 2 {
            return Err(Error::Format("density needs at least two grid points".into()));
        }
        let bin_width = grid[1] - grid[0];
        Ok(Self { grid, density, n_samples: 0, bin_width, clipped_mass: 0.0, warnings: vec![] })
    }
}
