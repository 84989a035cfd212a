//! Closed-form targets: stationary laws of the driving processes, leverage
//! and volatility-autocorrelation curves, and transient moments of Y.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::distribution::{self as sd, ContinuousCDF};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::model::{ModelKind, ModelParams};

/// Parametric densities used as stationary laws and as fit families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DensityFamily {
    Normal { mean: f64, std: f64 },
    Gamma { shape: f64, scale: f64 },
    LogNormal { log_mean: f64, log_std: f64 },
    StudentT { location: f64, scale: f64, dof: f64 },
}

impl DensityFamily {
    pub fn normal(mean: f64, std: f64) -> Result<Self> {
        Self::Normal { mean, std }.checked()
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        Self::Gamma { shape, scale }.checked()
    }

    pub fn log_normal(log_mean: f64, log_std: f64) -> Result<Self> {
        Self::LogNormal { log_mean, log_std }.checked()
    }

    pub fn student_t(location: f64, scale: f64, dof: f64) -> Result<Self> {
        Self::StudentT { location, scale, dof }.checked()
    }

    fn checked(self) -> Result<Self> {
        let ok = match self {
            Self::Normal { mean, std } => mean.is_finite() && std > 0.0 && std.is_finite(),
            Self::Gamma { shape, scale } => {
                shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite()
            }
            Self::LogNormal { log_mean, log_std } => {
                log_mean.is_finite() && log_std > 0.0 && log_std.is_finite()
            }
            Self::StudentT { location, scale, dof } => {
                location.is_finite() && scale > 0.0 && scale.is_finite() && dof > 0.0 && dof.is_finite()
            }
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::InvalidParams(format!("invalid density parameters {self:?}")))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Normal { .. } => "normal",
            Self::Gamma { .. } => "gamma",
            Self::LogNormal { .. } => "log_normal",
            Self::StudentT { .. } => "student_t",
        }
    }

    /// Number of free parameters.
    pub fn param_count(&self) -> usize {
        match self {
            Self::StudentT { .. } => 3,
            _ => 2,
        }
    }

    /// (name, value) pairs in declaration order.
    pub fn parameters(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Self::Normal { mean, std } => vec![("mean", mean), ("std", std)],
            Self::Gamma { shape, scale } => vec![("shape", shape), ("scale", scale)],
            Self::LogNormal { log_mean, log_std } => vec![("log_mean", log_mean), ("log_std", log_std)],
            Self::StudentT { location, scale, dof } => {
                vec![("location", location), ("scale", scale), ("dof", dof)]
            }
        }
    }

    /// True when `x` lies where the density is positive.
    pub fn in_support(&self, x: f64) -> bool {
        match self {
            Self::Gamma { .. } | Self::LogNormal { .. } => x > 0.0,
            _ => x.is_finite(),
        }
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        match *self {
            Self::Normal { mean, std } => {
                let z = (x - mean) / std;
                -0.5 * z * z - std.ln() - 0.5 * (2.0 * PI).ln()
            }
            Self::Gamma { shape, scale } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                (shape - 1.0) * x.ln() - x / scale - ln_gamma(shape) - shape * scale.ln()
            }
            Self::LogNormal { log_mean, log_std } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let lx = x.ln();
                let z = (lx - log_mean) / log_std;
                -0.5 * z * z - lx - log_std.ln() - 0.5 * (2.0 * PI).ln()
            }
            Self::StudentT { location, scale, dof } => {
                let z = (x - location) / scale;
                ln_gamma(0.5 * (dof + 1.0))
                    - ln_gamma(0.5 * dof)
                    - 0.5 * (dof * PI).ln()
                    - scale.ln()
                    - 0.5 * (dof + 1.0) * (z * z / dof).ln_1p()
            }
        }
    }

    /// Σ log_pdf(xᵢ), with the normalizing constants computed once.
    pub fn log_likelihood(&self, xs: &[f64]) -> f64 {
        let n = xs.len() as f64;
        match *self {
            Self::Normal { mean, std } => {
                let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
                -0.5 * ss / (std * std) - n * (std.ln() + 0.5 * (2.0 * PI).ln())
            }
            Self::Gamma { shape, scale } => {
                if xs.iter().any(|&x| x <= 0.0) {
                    return f64::NEG_INFINITY;
                }
                let (sl, s) = xs.iter().fold((0.0, 0.0), |(a, b), &x| (a + x.ln(), b + x));
                (shape - 1.0) * sl - s / scale - n * (ln_gamma(shape) + shape * scale.ln())
            }
            Self::LogNormal { log_mean, log_std } => {
                if xs.iter().any(|&x| x <= 0.0) {
                    return f64::NEG_INFINITY;
                }
                let (mut sl, mut sz) = (0.0, 0.0);
                for &x in xs {
                    let lx = x.ln();
                    let z = (lx - log_mean) / log_std;
                    sl += lx;
                    sz += z * z;
                }
                -0.5 * sz - sl - n * (log_std.ln() + 0.5 * (2.0 * PI).ln())
            }
            Self::StudentT { location, scale, dof } => {
                let c = ln_gamma(0.5 * (dof + 1.0)) - ln_gamma(0.5 * dof) - 0.5 * (dof * PI).ln() - scale.ln();
                let tail: f64 = xs
                    .iter()
                    .map(|&x| {
                        let z = (x - location) / scale;
                        (z * z / dof).ln_1p()
                    })
                    .sum();
                n * c - 0.5 * (dof + 1.0) * tail
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.log_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        // parameters are validated on construction
        match *self {
            Self::Normal { mean, std } => sd::Normal::new(mean, std).expect("valid").cdf(x),
            Self::Gamma { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    sd::Gamma::new(shape, 1.0 / scale).expect("valid").cdf(x)
                }
            }
            Self::LogNormal { log_mean, log_std } => {
                if x <= 0.0 {
                    0.0
                } else {
                    sd::LogNormal::new(log_mean, log_std).expect("valid").cdf(x)
                }
            }
            Self::StudentT { location, scale, dof } => {
                sd::StudentsT::new(location, scale, dof).expect("valid").cdf(x)
            }
        }
    }

    pub fn mean(&self) -> Option<f64> {
        match *self {
            Self::Normal { mean, .. } => Some(mean),
            Self::Gamma { shape, scale } => Some(shape * scale),
            Self::LogNormal { log_mean, log_std } => Some((log_mean + 0.5 * log_std * log_std).exp()),
            Self::StudentT { location, dof, .. } => (dof > 1.0).then_some(location),
        }
    }

    pub fn variance(&self) -> Option<f64> {
        match *self {
            Self::Normal { std, .. } => Some(std * std),
            Self::Gamma { shape, scale } => Some(shape * scale * scale),
            Self::LogNormal { log_mean, log_std } => {
                let s2 = log_std * log_std;
                Some((s2.exp() - 1.0) * (2.0 * log_mean + s2).exp())
            }
            Self::StudentT { scale, dof, .. } => (dof > 2.0).then(|| scale * scale * dof / (dof - 2.0)),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Normal { mean, std } => rand_distr::Normal::new(mean, std).expect("valid").sample(rng),
            Self::Gamma { shape, scale } => rand_distr::Gamma::new(shape, scale).expect("valid").sample(rng),
            Self::LogNormal { log_mean, log_std } => {
                rand_distr::LogNormal::new(log_mean, log_std).expect("valid").sample(rng)
            }
            Self::StudentT { location, scale, dof } => {
                location + scale * rand_distr::StudentT::new(dof).expect("valid").sample(rng)
            }
        }
    }
}

impl fmt::Display for DensityFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name())?;
        for (i, (k, v)) in self.parameters().into_iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k} = {v}")?;
        }
        f.write_str(")")
    }
}

/// β = k²/(2α), strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Beta(f64);

impl Beta {
    pub fn new(beta: f64) -> Result<Self> {
        if beta > 0.0 && beta.is_finite() {
            Ok(Self(beta))
        } else {
            Err(Error::InvalidParams(format!("beta must be > 0 (got {beta})")))
        }
    }

    pub fn from_params(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        Self::new(params.beta())
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Stationary law of the volatility variable.
///
/// Vasicek: σ = Y ~ Normal(m, √β). Heston: the law is that of Y = σ²,
/// Gamma(2αm/k², β). exp-OU: σ = e^Y ~ LogNormal(0, √β).
pub fn stationary_volatility_pdf(params: &ModelParams) -> Result<DensityFamily> {
    let beta = Beta::from_params(params)?.value();
    match params.kind {
        ModelKind::Vasicek => DensityFamily::normal(params.m, beta.sqrt()),
        ModelKind::Heston => {
            DensityFamily::gamma(2.0 * params.alpha * params.m / (params.k * params.k), beta)
        }
        ModelKind::ExpOu => DensityFamily::log_normal(0.0, beta.sqrt()),
    }
}

/// Stationary law of the driving process Y itself.
pub fn stationary_driver_pdf(params: &ModelParams) -> Result<DensityFamily> {
    match params.kind {
        ModelKind::ExpOu => DensityFamily::normal(0.0, Beta::from_params(params)?.value().sqrt()),
        _ => stationary_volatility_pdf(params),
    }
}

fn heaviside(tau: f64) -> f64 {
    if tau >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Leverage curve: ρe^{−ατ}H(τ) for Vasicek, ρe^{−k²τ}H(τ) for exp-OU, with H(0) = 1.
pub fn leverage_analytic(params: &ModelParams, tau: f64) -> Result<f64> {
    params.validate()?;
    let rate = match params.kind {
        ModelKind::Vasicek => params.alpha,
        ModelKind::ExpOu => params.k * params.k,
        ModelKind::Heston => {
            return Err(Error::UnsupportedModel("no closed-form leverage curve for heston".into()))
        }
    };
    if tau < 0.0 {
        return Ok(0.0);
    }
    Ok(params.rho * (-rate * tau).exp() * heaviside(tau))
}

/// Multiplier that brings the raw return-based leverage coefficient
/// `E[dx(t+τ)² dx(t)] / E[dx²]²` to ρ as τ → 0⁺.
///
/// Propagating the dW₁(t) component of dW₂(t) into σ(t+τ)² gives, for the
/// Euler scheme at leading order in Δt,
///
/// ```text
/// Vasicek  raw L(τ) = 2kρ e^{−ατ} (m² + β e^{−ατ}) / (m² + β)²
/// Heston   raw L(τ) = (kρ/m) e^{−ατ}
/// exp-OU   raw L(τ) = 2kρ exp(−ατ + 2β e^{−ατ} − 3β/2)
/// ```
///
/// so the multipliers are (m² + β)/(2k), m/k and e^{−β/2}/(2k).
pub fn leverage_normalization(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let (k, beta) = (params.k, params.beta());
    Ok(match params.kind {
        ModelKind::Vasicek => (params.m * params.m + beta) / (2.0 * k),
        ModelKind::Heston => params.m / k,
        ModelKind::ExpOu => (-0.5 * beta).exp() / (2.0 * k),
    })
}

/// Volatility autocorrelation curve.
///
/// exp-OU: `(exp(4β e^{−ατ}) − 1)/(3e^{4β} − 1)`, the squared-increment
/// coefficient, which is below 1 at τ = 0. Vasicek and Heston: the unit
/// single exponential e^{−ατ}; only its shape is meaningful.
pub fn autocorr_analytic(params: &ModelParams, tau: f64) -> Result<f64> {
    params.validate()?;
    if !(tau >= 0.0) {
        return Err(Error::InvalidParams(format!("tau must be >= 0 (got {tau})")));
    }
    let decay = (-params.alpha * tau).exp();
    Ok(match params.kind {
        ModelKind::ExpOu => {
            let b4 = 4.0 * params.beta();
            (b4 * decay).exp_m1() / (3.0 * b4.exp() - 1.0)
        }
        ModelKind::Vasicek | ModelKind::Heston => decay,
    })
}

/// Mean of Y(t) started at y0: level + (y0 − level)e^{−αt}.
pub fn transient_mean(params: &ModelParams, t: f64) -> Result<f64> {
    params.validate()?;
    if !(t >= 0.0) {
        return Err(Error::InvalidParams(format!("t must be >= 0 (got {t})")));
    }
    let level = params.level();
    Ok(level + (params.y0 - level) * (-params.alpha * t).exp())
}

/// Variance of Y(t) started at y0, β(1 − e^{−2αt}); linear models only.
pub fn transient_variance(params: &ModelParams, t: f64) -> Result<f64> {
    params.validate()?;
    if params.kind == ModelKind::Heston {
        return Err(Error::UnsupportedMoment(
            "heston variance of Y(t) is simulation-only".into(),
        ));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidParams(format!("t must be >= 0 (got {t})")));
    }
    Ok(-params.beta() * (-2.0 * params.alpha * t).exp_m1())
}

/// (mean, variance) of Y(t).
pub fn transient_moments(params: &ModelParams, t: f64) -> Result<(f64, f64)> {
    Ok((transient_mean(params, t)?, transient_variance(params, t)?))
}
