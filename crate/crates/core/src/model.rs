//! The three volatility models and the coupled return/driving-process system.
//!
//! Every model shares the two-dimensional system
//!
//! ```text
//! dX = f(Y) dW1,                    X(0) = 0
//! dY = drift(Y) dt + g(Y) dW2,      Y(0) = y0
//! ```
//!
//! where `X` is the zero-mean log-return (log price with drift and the
//! half-variance term removed) and `f` maps the driving process to the
//! volatility σ:
//!
//! | model    | f(Y)  | drift      | g(Y)   |
//! |----------|-------|------------|--------|
//! | Vasicek  | Y     | α(m − Y)   | k      |
//! | Heston   | √Y    | α(m − Y)   | k√Y    |
//! | exp-OU   | e^Y   | −αY        | k      |
//!
//! The exp-OU drift is the mean-reverting one (towards 0). Heston uses full
//! truncation: `f` and `g` see `max(Y, 0)` while the linear drift sees the raw
//! value.
//!
//! Rates are per unit of simulation time. The CLI and the examples use days.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diagnostics::Warning;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Vasicek,
    Heston,
    ExpOu,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Vasicek, ModelKind::Heston, ModelKind::ExpOu];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Vasicek => "vasicek",
            ModelKind::Heston => "heston",
            ModelKind::ExpOu => "exp_ou",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "vasicek" => Ok(ModelKind::Vasicek),
            "heston" => Ok(ModelKind::Heston),
            "exp_ou" | "expou" => Ok(ModelKind::ExpOu),
            other => Err(Error::InvalidParams(format!("unknown model '{other}'"))),
        }
    }
}

/// Coefficients of one model.
///
/// `m` is in volatility units for Vasicek and variance units for Heston; it is
/// unused for exp-OU (see [`ModelParams::level`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kind: ModelKind,
    /// Mean-reversion rate α, 1/time.
    pub alpha: f64,
    pub m: f64,
    /// Vol-of-vol k.
    pub k: f64,
    /// Correlation between the return and driving Wiener processes.
    pub rho: f64,
    /// Price drift μ, 1/time.
    pub mu: f64,
    pub y0: f64,
    pub s0: f64,
}

impl ModelParams {
    pub fn vasicek(alpha: f64, m: f64, k: f64, rho: f64) -> Self {
        Self { kind: ModelKind::Vasicek, alpha, m, k, rho, mu: 0.0, y0: m, s0: 100.0 }
    }

    pub fn heston(alpha: f64, m: f64, k: f64, rho: f64) -> Self {
        Self { kind: ModelKind::Heston, alpha, m, k, rho, mu: 0.0, y0: m, s0: 100.0 }
    }

    pub fn exp_ou(alpha: f64, k: f64, rho: f64) -> Self {
        Self { kind: ModelKind::ExpOu, alpha, m: 0.0, k, rho, mu: 0.0, y0: 0.0, s0: 100.0 }
    }

    pub fn with_y0(mut self, y0: f64) -> Self {
        self.y0 = y0;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_s0(mut self, s0: f64) -> Self {
        self.s0 = s0;
        self
    }

    /// Reversion level of Y: `m` for Vasicek and Heston, 0 for exp-OU.
    pub fn level(&self) -> f64 {
        match self.kind {
            ModelKind::ExpOu => 0.0,
            _ => self.m,
        }
    }

    /// β = k²/(2α), the stationary-variance scale of the driving process.
    pub fn beta(&self) -> f64 {
        self.k * self.k / (2.0 * self.alpha)
    }

    /// Checks the hard constraints and returns the soft ones as warnings.
    pub fn validate(&self) -> Result<Vec<Warning>> {
        let finite = [self.alpha, self.m, self.k, self.rho, self.mu, self.y0, self.s0]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("all coefficients must be finite".into()));
        }
        if self.alpha <= 0.0 {
            return Err(Error::InvalidParams(format!("alpha must be > 0 (got {})", self.alpha)));
        }
        if self.k <= 0.0 {
            return Err(Error::InvalidParams(format!("k must be > 0 (got {})", self.k)));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidParams(format!("rho must lie in [-1, 1] (got {})", self.rho)));
        }
        if self.s0 <= 0.0 {
            return Err(Error::InvalidParams(format!("s0 must be > 0 (got {})", self.s0)));
        }

        let mut warnings = Vec::new();
        match self.kind {
            ModelKind::Heston => {
                if self.m <= 0.0 {
                    return Err(Error::InvalidParams(format!(
                        "heston requires m > 0 (got {})",
                        self.m
                    )));
                }
                if self.y0 < 0.0 {
                    return Err(Error::InvalidParams(format!(
                        "heston requires y0 >= 0 (got {})",
                        self.y0
                    )));
                }
                if !self.feller_satisfied() {
                    warnings.push(Warning::FellerViolated {
                        two_alpha_m: 2.0 * self.alpha * self.m,
                        k_squared: self.k * self.k,
                    });
                }
            }
            ModelKind::ExpOu if self.m != 0.0 => {
                warnings.push(Warning::LevelIgnored { given: self.m });
            }
            _ => {}
        }
        if self.rho.abs() == 1.0 {
            warnings.push(Warning::BoundaryCorrelation { rho: self.rho });
        }
        Ok(warnings)
    }

    /// Feller indicator 2·α·m ≥ k². Only meaningful for Heston.
    pub fn feller_satisfied(&self) -> bool {
        2.0 * self.alpha * self.m >= self.k * self.k
    }

    pub fn coefficients(&self) -> Result<SdeCoefficients> {
        self.validate()?;
        Ok(SdeCoefficients {
            kind: self.kind,
            alpha: self.alpha,
            level: self.level(),
            k: self.k,
        })
    }
}

/// Drift, diffusion and volatility map of the driving process for one model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeCoefficients {
    kind: ModelKind,
    alpha: f64,
    level: f64,
    k: f64,
}

impl SdeCoefficients {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn drift_y(&self, y: f64) -> f64 {
        self.alpha * (self.level - y)
    }

    pub fn diff_y(&self, y: f64) -> f64 {
        match self.kind {
            ModelKind::Heston => self.k * y.max(0.0).sqrt(),
            ModelKind::Vasicek | ModelKind::ExpOu => self.k,
        }
    }

    /// σ = f(Y).
    pub fn vol_map(&self, y: f64) -> f64 {
        match self.kind {
            ModelKind::Vasicek => y,
            ModelKind::Heston => y.max(0.0).sqrt(),
            ModelKind::ExpOu => y.exp(),
        }
    }

    /// σ², the instantaneous return variance rate.
    pub fn variance_rate(&self, y: f64) -> f64 {
        match self.kind {
            ModelKind::Heston => y.max(0.0),
            _ => {
                let s = self.vol_map(y);
                s * s
            }
        }
    }
}

/// Inverts the zero-mean log-return definition:
/// `S = s0 · exp(μt − ½∫σ² + x)`.
pub fn log_return_to_price(x: f64, t: f64, params: &ModelParams, integrated_var: f64) -> Result<f64> {
    if t < 0.0 || integrated_var < 0.0 {
        return Err(Error::InvalidParams(format!(
            "need t >= 0 and integrated variance >= 0 (got t = {t}, {integrated_var})"
        )));
    }
    Ok(params.s0 * (params.mu * t - 0.5 * integrated_var + x).exp())
}

/// Forward map: `x = ln(S/s0) − μt + ½∫σ²`.
pub fn price_to_log_return(price: f64, t: f64, params: &ModelParams, integrated_var: f64) -> Result<f64> {
    if price <= 0.0 {
        return Err(Error::InvalidParams(format!("price must be > 0 (got {price})")));
    }
    if t < 0.0 || integrated_var < 0.0 {
        return Err(Error::InvalidParams(format!(
            "need t >= 0 and integrated variance >= 0 (got t = {t}, {integrated_var})"
        )));
    }
    Ok((price / params.s0).ln() - params.mu * t + 0.5 * integrated_var)
}
