//! Empirical characteristic function and its inversion by FFT.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use super::EmpiricalDensity;
use crate::diagnostics::Warning;
use crate::error::{Error, Result};

/// Samples per parallel work unit in `empirical_cf_on_grid`. Fixed so the
/// summation order, and so the result, does not depend on the pool size.
const CF_CHUNK: usize = 8192;
/// Recurrence steps between exact re-evaluations of e^{iωx}.
const RESEED_EVERY: usize = 64;

/// Uniform frequency grid ω_j = (j − n/2)·dω, j = 0..n, with n a power of two.
/// Its conjugate space grid is x_k = (k − n/2)·dx with dx·dω = 2π/n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyGrid {
    n: usize,
    d_omega: f64,
}

impl FrequencyGrid {
    pub const DEFAULT_POINTS: usize = 1 << 12;
    pub const MIN_POINTS: usize = 1 << 8;

    pub fn new(n: usize, d_omega: f64) -> Result<Self> {
        if !n.is_power_of_two() || n < Self::MIN_POINTS {
            return Err(Error::InvalidParams(format!(
                "frequency grid needs 2^p points with p >= 8 (got {n})"
            )));
        }
        if !(d_omega > 0.0 && d_omega.is_finite()) {
            return Err(Error::InvalidParams(format!("d_omega must be > 0 (got {d_omega})")));
        }
        Ok(Self { n, d_omega })
    }

    /// Grid spanning [−half_extent, half_extent).
    pub fn covering(half_extent: f64, n: usize) -> Result<Self> {
        Self::new(n, 2.0 * half_extent / n as f64)
    }

    /// Extent 8/s, with s the smaller of the sample standard deviation and
    /// the normal-equivalent IQR/1.349. The IQR term keeps heavy-tailed
    /// samples, whose variance is dominated by rare large values, from
    /// getting a grid that stops before φ has decayed.
    pub fn for_samples(samples: &[f64], n: usize) -> Result<Self> {
        let std = match crate::stats::mean_variance(samples) {
            Ok((_, v)) if v.is_finite() => v.sqrt(),
            _ => 0.0,
        };
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let iqr_scale = if sorted.len() >= 2 {
            (crate::stats::quantile_sorted(&sorted, 0.75) - crate::stats::quantile_sorted(&sorted, 0.25)) / 1.349
        } else {
            0.0
        };
        let scale = match (std > 0.0, iqr_scale > 0.0) {
            (true, true) => std.min(iqr_scale),
            (true, false) => std,
            (false, true) => iqr_scale,
            (false, false) => 1.0,
        };
        Self::covering(8.0 / scale, n)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn d_omega(&self) -> f64 {
        self.d_omega
    }

    pub fn omega(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.d_omega
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.omega(j)).collect()
    }

    pub fn dx(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.n as f64 * self.d_omega)
    }

    pub fn x(&self, k: usize) -> f64 {
        (k as f64 - (self.n / 2) as f64) * self.dx()
    }
}

/// φ̂(ω) = (1/N)·Σ e^{iωxₙ} at arbitrary frequencies.
pub fn empirical_cf(samples: &[f64], omegas: &[f64]) -> Result<Vec<Complex64>> {
    check_samples(samples)?;
    let n = samples.len() as f64;
    Ok(omegas
        .par_iter()
        .map(|&w| {
            if w == 0.0 {
                return Complex64::new(1.0, 0.0);
            }
            let (mut re, mut im) = (0.0, 0.0);
            for &x in samples {
                let (s, c) = (w * x).sin_cos();
                re += c;
                im += s;
            }
            Complex64::new(re / n, im / n)
        })
        .collect())
}

/// φ̂ on a `FrequencyGrid`, using φ̂(−ω) = conj φ̂(ω) and a rotation
/// recurrence along ω.
pub fn empirical_cf_on_grid(samples: &[f64], grid: &FrequencyGrid) -> Result<Vec<Complex64>> {
    check_samples(samples)?;
    let half = grid.len() / 2;
    let dw = grid.d_omega();
    let partials: Vec<Vec<Complex64>> = samples
        .par_chunks(CF_CHUNK)
        .map(|chunk| {
            let mut acc = vec![Complex64::new(0.0, 0.0); half + 1];
            for &x in chunk {
                let (s, c) = (dw * x).sin_cos();
                let step = Complex64::new(c, s);
                let mut z = Complex64::new(1.0, 0.0);
                for (m, a) in acc.iter_mut().enumerate() {
                    if m % RESEED_EVERY == 0 && m > 0 {
                        let (s, c) = (m as f64 * dw * x).sin_cos();
                        z = Complex64::new(c, s);
                    }
                    *a += z;
                    z *= step;
                }
            }
            acc
        })
        .collect();
    let mut pos = vec![Complex64::new(0.0, 0.0); half + 1];
    for part in &partials {
        for (p, v) in pos.iter_mut().zip(part) {
            *p += v;
        }
    }
    let n = samples.len() as f64;
    for p in pos.iter_mut() {
        *p /= n;
    }
    pos[0] = Complex64::new(1.0, 0.0);
    Ok((0..grid.len())
        .map(|j| if j >= half { pos[j - half] } else { pos[half - j].conj() })
        .collect())
}

fn check_samples(samples: &[f64]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("characteristic function of an empty sample".into()));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParams("non-finite sample".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionOptions {
    /// Edge |φ| above which a `SlowCfDecay` warning is attached.
    pub warn_edge: f64,
    /// Edge |φ| above which inversion fails with `GridTooCoarse`.
    pub max_edge: f64,
    /// Samples behind φ, 0 for an exact transform.
    pub n_samples: usize,
    /// Interval outside which the density is set to zero. The inversion of
    /// an empirical φ̂ spreads sampling noise over the whole conjugate grid,
    /// which is far wider than the data; without this cut, clipping that
    /// noise at zero adds spurious mass of order √(n_grid / n_samples).
    pub support: Option<(f64, f64)>,
}

impl Default for InversionOptions {
    fn default() -> Self {
        Self { warn_edge: 1e-6, max_edge: 1e-3, n_samples: 0, support: None }
    }
}

impl InversionOptions {
    /// Settings for φ̂ built from `samples`. Its modulus does not decay below
    /// the sampling floor ~1/√n, so the edge limits are raised to 3/√n
    /// (warning) and 5/√n (error) when these exceed the defaults. The support
    /// is the sample range widened by `margin` on each side.
    pub fn for_samples(samples: &[f64], margin: f64) -> Self {
        let n = samples.len();
        let floor = 1.0 / (n.max(1) as f64).sqrt();
        let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Self {
            warn_edge: (3.0 * floor).max(1e-6),
            max_edge: (5.0 * floor).max(1e-3),
            n_samples: n,
            support: (lo <= hi).then_some((lo - margin, hi + margin)),
        }
    }

    /// No edge check at all.
    pub fn unchecked() -> Self {
        Self { warn_edge: f64::INFINITY, max_edge: f64::INFINITY, n_samples: 0, support: None }
    }
}

/// p(x_k) = (1/2π)·Σ_j φ(ω_j)·e^{−iω_j x_k}·dω on the conjugate grid.
///
/// With ω_j x_k = 2πjk/n − πj − πk + πn/2 the sum is a forward DFT of
/// (−1)^j·φ_j followed by a (−1)^k sign flip (n/2 is even for n ≥ 4).
/// Negative values are clipped to zero and their mass reported; values
/// outside `options.support` are set to zero. When either changed the
/// density, it is rescaled to unit trapezoid mass.
pub fn invert_cf(phi: &[Complex64], grid: &FrequencyGrid, options: &InversionOptions) -> Result<EmpiricalDensity> {
    let n = grid.len();
    if phi.len() != n {
        return Err(Error::InvalidParams(format!("phi has {} values for a grid of {n}", phi.len())));
    }
    let edge = phi[0].norm().max(phi[n - 1].norm());
    if edge > options.max_edge {
        return Err(Error::GridTooCoarse { edge_modulus: edge });
    }
    let mut warnings = Vec::new();
    if edge > options.warn_edge {
        warnings.push(Warning::SlowCfDecay { edge_modulus: edge });
    }

    let mut buf: Vec<Complex64> = phi
        .iter()
        .enumerate()
        .map(|(j, v)| if j % 2 == 0 { *v } else { -*v })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let scale = grid.d_omega() / (2.0 * std::f64::consts::PI);
    let dx = grid.dx();
    let mut clipped_mass = 0.0;
    let density: Vec<f64> = buf
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let p = if k % 2 == 0 { v.re } else { -v.re } * scale;
            let outside = options.support.is_some_and(|(lo, hi)| grid.x(k) < lo || grid.x(k) > hi);
            if outside {
                0.0
            } else if p < 0.0 {
                clipped_mass -= p * dx;
                0.0
            } else {
                p
            }
        })
        .collect();
    if clipped_mass > 1e-4 {
        warnings.push(Warning::NegativeMassClipped { mass: clipped_mass });
    }
    let mut out = EmpiricalDensity {
        grid: (0..n).map(|k| grid.x(k)).collect(),
        density,
        n_samples: options.n_samples,
        bin_width: dx,
        clipped_mass,
        warnings,
    };
    let mass = out.trapezoid_mass();
    if mass > 0.0 && (clipped_mass > 0.0 || options.support.is_some()) {
        out.density.iter_mut().for_each(|p| *p /= mass);
    }
    Ok(out)
}
