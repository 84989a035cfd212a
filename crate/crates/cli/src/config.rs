//! Run configuration: TOML with one table per concern. Unknown keys are
//! rejected with the offending line and key.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use svlab_core::simulate::{InitialState, PathConfig};
use svlab_core::{ModelKind, ModelParams};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PdfMethod {
    #[default]
    Histogram,
    /// Empirical characteristic function inverted by FFT.
    Cf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FitWhat {
    /// Absolute-return volatility proxy against Normal, Gamma, Log-normal.
    #[default]
    Vol,
    /// Daily returns against Normal and Student-t.
    Ret,
    /// Densities of multi-day returns.
    Horizons,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    /// Output directory. Not echoed into manifests, so runs into different
    /// directories stay comparable.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    pub model: Option<ModelSection>,
    #[serde(default)]
    pub paths: PathsSection,
    #[serde(default)]
    pub pdf: PdfSection,
    #[serde(default)]
    pub correlations: CorrelationsSection,
    #[serde(default)]
    pub fit: FitSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: String,
    pub alpha: f64,
    /// Required for vasicek and heston, ignored by exp_ou.
    pub m: Option<f64>,
    pub k: f64,
    pub rho: f64,
    #[serde(default)]
    pub mu: f64,
    /// Defaults to m (0 for exp_ou).
    pub y0: Option<f64>,
    #[serde(default = "default_s0")]
    pub s0: f64,
}

fn default_s0() -> f64 {
    100.0
}

impl ModelSection {
    pub fn to_params(&self) -> CliResult<ModelParams> {
        let kind: ModelKind = self.kind.parse().map_err(|e: svlab_core::Error| CliError::Config(e.to_string()))?;
        let mut p = match kind {
            ModelKind::Vasicek | ModelKind::Heston => {
                let m = self
                    .m
                    .ok_or_else(|| CliError::Config(format!("[model] m is required for {kind}")))?;
                if kind == ModelKind::Vasicek {
                    ModelParams::vasicek(self.alpha, m, self.k, self.rho)
                } else {
                    ModelParams::heston(self.alpha, m, self.k, self.rho)
                }
            }
            ModelKind::ExpOu => {
                let mut p = ModelParams::exp_ou(self.alpha, self.k, self.rho);
                // kept so validation can warn that it is ignored
                p.m = self.m.unwrap_or(0.0);
                p
            }
        };
        if let Some(y0) = self.y0 {
            p = p.with_y0(y0);
        }
        Ok(p.with_mu(self.mu).with_s0(self.s0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsSection {
    pub dt: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub record_stride: usize,
    pub initial: InitialState,
}

impl Default for PathsSection {
    fn default() -> Self {
        Self { dt: 0.01, n_steps: 1000, n_paths: 1, record_stride: 1, initial: InitialState::Fixed }
    }
}

impl PathsSection {
    pub fn to_config(&self, seed: u64) -> PathConfig {
        PathConfig::new(self.dt, self.n_steps, self.n_paths, seed).with_stride(self.record_stride)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PdfSection {
    /// In the time unit of the model rates.
    pub horizons: Vec<f64>,
    pub n_paths: usize,
    pub dt: f64,
    pub method: PdfMethod,
    /// Histogram bin count; Freedman–Diaconis when absent.
    pub bins: Option<usize>,
    pub cf_points: usize,
    /// Adds a Gaussian column with the sample mean and variance.
    pub reference: bool,
}

impl Default for PdfSection {
    fn default() -> Self {
        Self {
            horizons: vec![1.0, 5.0, 20.0],
            n_paths: 20_000,
            dt: 0.1,
            method: PdfMethod::Histogram,
            bins: None,
            cf_points: 4096,
            reference: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorrelationsSection {
    /// Length of the single series, at 252 trading days per year.
    pub years: u32,
    /// Step in days; model rates are per day here.
    pub dt: f64,
    pub max_lag: usize,
    pub resamples: usize,
    /// Bootstrap block in steps; 10/(α·dt) when absent.
    pub block_len: Option<usize>,
}

impl Default for CorrelationsSection {
    fn default() -> Self {
        Self { years: 100, dt: 1.0, max_lag: 100, resamples: 200, block_len: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSection {
    pub prices: Option<PathBuf>,
    pub what: FitWhat,
    pub horizons: Vec<usize>,
    pub symbol: Option<String>,
}

impl Default for FitSection {
    fn default() -> Self {
        Self { prices: None, what: FitWhat::Vol, horizons: vec![1, 5, 20], symbol: None }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn params(&self) -> CliResult<ModelParams> {
        self.model
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [model] section".into()))?
            .to_params()
    }
}

/// Every accepted key with its default and meaning.
pub const REFERENCE: &[(&str, &str, &str)] = &[
    ("seed", "0", "master seed; path i uses ChaCha8 stream i of this seed"),
    ("out", "\"out\"", "output directory (overridden by --out)"),
    ("format", "\"csv\"", "path file format for simulate: csv | binary"),
    ("model.kind", "-", "vasicek | heston | exp_ou"),
    ("model.alpha", "-", "mean-reversion rate α > 0"),
    ("model.m", "-", "reversion level (vasicek, heston); ignored by exp_ou"),
    ("model.k", "-", "vol-of-vol k > 0"),
    ("model.rho", "-", "return/volatility correlation in [-1, 1]"),
    ("model.mu", "0", "price drift"),
    ("model.y0", "m", "initial value of the driving process"),
    ("model.s0", "100", "initial price"),
    ("paths.dt", "0.01", "time step"),
    ("paths.n_steps", "1000", "steps per path"),
    ("paths.n_paths", "1", "number of paths"),
    ("paths.record_stride", "1", "keep every n-th step"),
    ("paths.initial", "\"fixed\"", "fixed (y0) | stationary (draw Y(0) from its stationary law)"),
    ("pdf.horizons", "[1, 5, 20]", "return horizons, in the time unit of the rates"),
    ("pdf.n_paths", "20000", "Monte Carlo paths per horizon"),
    ("pdf.dt", "0.1", "time step"),
    ("pdf.method", "\"histogram\"", "histogram | cf"),
    ("pdf.bins", "Freedman-Diaconis", "histogram bin count"),
    ("pdf.cf_points", "4096", "frequency grid size for the cf method (power of two >= 256)"),
    ("pdf.reference", "true", "add a Gaussian reference column"),
    ("correlations.years", "100", "length of the single long series"),
    ("correlations.dt", "1", "time step in days (rates per day)"),
    ("correlations.max_lag", "100", "largest lag in steps"),
    ("correlations.resamples", "200", "block-bootstrap resamples"),
    ("correlations.block_len", "2*max_lag; 10/(alpha*dt)", "bootstrap block length in steps (leverage; autocorrelation)"),
    ("fit.prices", "-", "price CSV with Date and Close columns (overridden by --prices)"),
    ("fit.what", "\"vol\"", "vol | ret | horizons"),
    ("fit.horizons", "[1, 5, 20]", "horizons in trading days for fit.what = horizons"),
    ("fit.symbol", "file stem", "label for the series"),
];

pub fn reference_text() -> String {
    let mut s = String::from("# svlab configuration keys\n\n| key | default | meaning |\n|---|---|---|\n");
    for (key, default, doc) in REFERENCE {
        s.push_str(&format!("| `{key}` | {default} | {doc} |\n"));
    }
    s
}
