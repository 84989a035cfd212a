//! Command-line front end: configuration, price ingestion and the
//! simulate / pdf / correlations / fit commands.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod prices;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::Outcome;
pub use config::{FitWhat, OutputFormat, RunConfig};
pub use error::{CliError, CliResult, EXIT_NUMERICAL, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "svlab", version, about = "Correlated stochastic volatility laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (default "out").
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Worker threads; all cores when unset.
    #[arg(long, global = true, env = "SVLAB_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Simulate paths and write them with a manifest.
    Simulate,
    /// Monte Carlo return densities, one file per horizon.
    Pdf {
        /// Comma-separated horizons, overriding pdf.horizons.
        #[arg(long, value_delimiter = ',')]
        horizons: Option<Vec<f64>>,
    },
    /// Leverage and volatility autocorrelation of one long series.
    Correlations {
        #[arg(long)]
        years: Option<u32>,
    },
    /// Maximum-likelihood fits on a daily close CSV.
    Fit {
        #[arg(long)]
        prices: Option<PathBuf>,
        #[arg(long, value_enum)]
        what: Option<FitWhat>,
        /// Comma-separated day counts for --what horizons.
        #[arg(long, value_delimiter = ',')]
        horizons: Option<Vec<usize>>,
    },
    /// Print every configuration key with its default.
    ConfigReference,
}

/// Loads the configuration and applies command-line overrides.
pub fn resolve_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.out = Some(out.clone());
    }
    if let Some(format) = cli.format {
        config.format = format;
    }
    match &cli.command {
        Command::Pdf { horizons: Some(h) } => config.pdf.horizons = h.clone(),
        Command::Correlations { years: Some(y) } => config.correlations.years = *y,
        Command::Fit { prices, what, horizons } => {
            if let Some(p) = prices {
                config.fit.prices = Some(p.clone());
            }
            if let Some(w) = what {
                config.fit.what = *w;
            }
            if let Some(h) = horizons {
                config.fit.horizons = h.clone();
            }
        }
        _ => {}
    }
    Ok(config)
}

pub fn run(cli: &Cli) -> CliResult<Outcome> {
    if let Command::ConfigReference = cli.command {
        print!("{}", config::reference_text());
        return Ok(Outcome::default());
    }
    let config = resolve_config(cli)?;
    let out = config.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let work = || match cli.command {
        Command::Simulate => commands::cmd_simulate(&config, &out),
        Command::Pdf { .. } => commands::cmd_pdf(&config, &out),
        Command::Correlations { .. } => commands::cmd_correlations(&config, &out),
        Command::Fit { .. } => commands::cmd_fit(&config, &out),
        Command::ConfigReference => unreachable!("handled above"),
    };
    match cli.threads {
        Some(0) => Err(CliError::Usage("thread count must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} workers: {e}")))?
            .install(work),
        None => work(),
    }
}
