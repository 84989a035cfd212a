use std::fmt;

use serde::Serialize;

/// Non-fatal conditions attached to results. None of these stop a computation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// Heston parameters with 2·α·m < k².
    FellerViolated { two_alpha_m: f64, k_squared: f64 },
    /// |ρ| = 1, the two Wiener processes are degenerate.
    BoundaryCorrelation { rho: f64 },
    /// α·Δt above the 0.1 rule-of-thumb threshold.
    CoarseTimeStep { alpha_dt: f64 },
    /// Fewer samples than recommended for the requested statistic.
    LowStatistics { what: String, have: usize, recommended: usize },
    /// |φ| at the frequency-grid edge is above the warning level.
    SlowCfDecay { edge_modulus: f64 },
    /// Negative density values clipped to zero after Fourier inversion.
    NegativeMassClipped { mass: f64 },
    /// Overlapping windows used for multi-day returns.
    OverlappingWindows { horizon: usize, effective_samples: f64 },
    /// The parameter m is ignored for the exponential OU model and forced to 0.
    LevelIgnored { given: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::FellerViolated { two_alpha_m, k_squared } => write!(
                f,
                "Feller violated: 2*alpha*m = {two_alpha_m} < k^2 = {k_squared}"
            ),
            Warning::BoundaryCorrelation { rho } => {
                write!(f, "correlation at boundary (rho = {rho})")
            }
            Warning::CoarseTimeStep { alpha_dt } => write!(
                f,
                "alpha*dt = {alpha_dt} exceeds 0.1; time step is not small against 1/alpha"
            ),
            Warning::LowStatistics { what, have, recommended } => write!(
                f,
                "low statistics for {what}: {have} (recommended >= {recommended})"
            ),
            Warning::SlowCfDecay { edge_modulus } => write!(
                f,
                "characteristic function not decayed at grid edge (|phi| = {edge_modulus:e})"
            ),
            Warning::NegativeMassClipped { mass } => {
                write!(f, "clipped negative density mass {mass:e}")
            }
            Warning::OverlappingWindows { horizon, effective_samples } => write!(
                f,
                "overlapping {horizon}-day windows used (effective sample size ~{effective_samples:.0})"
            ),
            Warning::LevelIgnored { given } => {
                write!(f, "m = {given} ignored for exp-OU (reversion level is 0)")
            }
        }
    }
}
