//! The four analyses. Each writes its files plus a manifest into the
//! output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use svlab_core::analytic::{autocorr_analytic, leverage_analytic, leverage_normalization, DensityFamily};
use svlab_core::calibrate::{
    detrended_returns_from_closes, fit_all, multi_horizon_densities, volatility_proxy, FamilyKind, FitReport,
    PriceSeries,
};
use svlab_core::estimators::{
    estimate_autocorr, estimate_leverage, return_pdf_mc, Binning, CorrelationCurve, CorrelationOptions,
    DensityMethod, EmpiricalDensity, ReturnPdfOptions, ReturnSeries,
};
use svlab_core::simulate::{simulate_paths_from, single_long_series};
use svlab_core::textfmt::fmt_f64;
use svlab_core::{ModelKind, ModelParams, Warning};

use crate::config::{FitWhat, OutputFormat, PdfMethod, RunConfig};
use crate::error::{CliError, CliResult};
use crate::manifest::{sha256_hex, FileDigest, Manifest, MANIFEST_FILE};
use crate::prices::parse_prices;

/// Files written and diagnostics raised by one command.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
}

struct Run {
    out: PathBuf,
    manifest: Manifest,
    files: Vec<PathBuf>,
}

impl Run {
    fn new(command: &str, config: &RunConfig, out: &Path) -> CliResult<Self> {
        fs::create_dir_all(out)?;
        Ok(Self { out: out.to_path_buf(), manifest: Manifest::new(command, config), files: Vec::new() })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.out.join(name);
        fs::write(&path, bytes)?;
        self.manifest.outputs.push(FileDigest { file: name.into(), sha256: sha256_hex(bytes) });
        self.files.push(path);
        Ok(())
    }

    fn warn(&mut self, warnings: &[Warning]) {
        for w in warnings {
            let text = w.to_string();
            if !self.manifest.warnings.contains(&text) {
                self.manifest.warnings.push(text);
            }
        }
    }

    fn note(&mut self, text: impl Into<String>) {
        self.manifest.notes.push(text.into());
    }

    fn finish(mut self) -> CliResult<Outcome> {
        let json = self.manifest.to_json();
        let path = self.out.join(MANIFEST_FILE);
        fs::write(&path, json)?;
        self.files.push(path);
        Ok(Outcome { files: self.files, warnings: self.manifest.warnings, notes: self.manifest.notes })
    }
}

fn checked_params(config: &RunConfig, run: &mut Run) -> CliResult<ModelParams> {
    let params = config.params()?;
    let warnings = params.validate().map_err(|e| CliError::Config(e.to_string()))?;
    run.warn(&warnings);
    run.manifest.params = Some(params);
    Ok(params)
}

pub fn cmd_simulate(config: &RunConfig, out: &Path) -> CliResult<Outcome> {
    let mut run = Run::new("simulate", config, out)?;
    let params = checked_params(config, &mut run)?;
    let path_cfg = config.paths.to_config(config.seed);
    let warnings = path_cfg.validate(&params).map_err(|e| CliError::Config(e.to_string()))?;
    run.warn(&warnings);
    let paths = simulate_paths_from(&params, &path_cfg, config.paths.initial)?;
    let mut buf = Vec::new();
    match config.format {
        OutputFormat::Csv => {
            paths.write_csv(&mut buf)?;
            run.write("paths.csv", &buf)?;
        }
        OutputFormat::Binary => {
            paths.write_binary(&mut buf)?;
            run.write("paths.bin", &buf)?;
        }
    }
    run.finish()
}

pub fn density_csv(d: &EmpiricalDensity, extra: &[(&str, Vec<Option<f64>>)]) -> String {
    let mut s = String::from("x,density");
    for (name, _) in extra {
        s.push(',');
        s.push_str(name);
    }
    s.push('\n');
    for i in 0..d.len() {
        let _ = write!(s, "{},{}", fmt_f64(d.grid[i]), fmt_f64(d.density[i]));
        for (_, col) in extra {
            s.push(',');
            if let Some(v) = col[i] {
                s.push_str(&fmt_f64(v));
            }
        }
        s.push('\n');
    }
    s
}

pub fn cmd_pdf(config: &RunConfig, out: &Path) -> CliResult<Outcome> {
    let section = &config.pdf;
    if section.horizons.is_empty() {
        return Err(CliError::Usage("at least one horizon is required".into()));
    }
    if let Some(h) = section.horizons.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
        return Err(CliError::Usage(format!("horizons must be positive, got {h}")));
    }
    let mut run = Run::new("pdf", config, out)?;
    let params = checked_params(config, &mut run)?;
    let method = match section.method {
        PdfMethod::Histogram => DensityMethod::Histogram(section.bins.map_or(Binning::FreedmanDiaconis, Binning::Bins)),
        PdfMethod::Cf => DensityMethod::CharacteristicFunction { points: section.cf_points },
    };
    let opts = ReturnPdfOptions::new(section.n_paths, section.dt, config.seed).with_method(method);

    let mut summary = String::from("horizon,n_paths,mean,variance,skewness,excess_kurtosis,normalization\n");
    for &h in &section.horizons {
        let pdf = return_pdf_mc(&params, h, &opts)?;
        run.warn(&pdf.density.warnings);
        let d = &pdf.density;
        let mut extra = Vec::new();
        if section.reference {
            let gauss = DensityFamily::normal(pdf.moments.mean, pdf.moments.variance.sqrt()).ok();
            extra.push(("gaussian_reference", d.grid.iter().map(|&x| gauss.map(|g| g.pdf(x))).collect()));
        }
        run.write(&format!("pdf_h{}.csv", fmt_f64(h)), density_csv(d, &extra).as_bytes())?;
        let normalization: f64 = d.density.iter().sum::<f64>() * d.bin_width;
        let m = &pdf.moments;
        let _ = writeln!(
            summary,
            "{},{},{},{},{},{},{}",
            fmt_f64(h),
            section.n_paths,
            fmt_f64(m.mean),
            fmt_f64(m.variance),
            fmt_f64(m.skewness),
            fmt_f64(m.excess_kurtosis),
            fmt_f64(normalization)
        );
    }
    run.write("pdf_summary.csv", summary.as_bytes())?;
    run.finish()
}

fn curve_csv(curve: &CorrelationCurve, analytic: &[Option<f64>]) -> String {
    let mut s = String::from("lag,value,stderr,analytic\n");
    for (i, a) in analytic.iter().enumerate().take(curve.len()) {
        let a = a.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt_f64(curve.lags[i]),
            fmt_f64(curve.values[i]),
            fmt_f64(curve.stderr[i]),
            a
        );
    }
    s
}

pub fn cmd_correlations(config: &RunConfig, out: &Path) -> CliResult<Outcome> {
    let section = &config.correlations;
    let mut run = Run::new("correlations", config, out)?;
    let params = checked_params(config, &mut run)?;
    let paths = single_long_series(&params, section.years, section.dt, config.seed)?;
    let series = ReturnSeries::from_path(&paths, 0)?;

    let mut lev_opts = CorrelationOptions::new(section.max_lag)
        .with_seed(config.seed)
        .with_leverage_scale(leverage_normalization(&params)?);
    let mut ac_opts = CorrelationOptions::for_autocorr(&params, section.dt, section.max_lag).with_seed(config.seed);
    lev_opts.n_resamples = section.resamples;
    ac_opts.n_resamples = section.resamples;
    if section.block_len.is_some() {
        lev_opts.block_len = section.block_len;
        ac_opts.block_len = section.block_len;
    }

    let lev = estimate_leverage(&series, &lev_opts)?;
    run.warn(&lev.warnings);
    let lev_analytic: Vec<Option<f64>> = lev.lags.iter().map(|&t| leverage_analytic(&params, t).ok()).collect();
    if params.kind == ModelKind::Heston {
        run.note("no analytic leverage target for the heston model; analytic column left empty");
    }
    run.write("leverage.csv", curve_csv(&lev, &lev_analytic).as_bytes())?;

    let ac = estimate_autocorr(&series, &ac_opts)?;
    run.warn(&ac.warnings);
    let ac_analytic: Vec<Option<f64>> = match params.kind {
        ModelKind::ExpOu => ac.lags.iter().map(|&t| autocorr_analytic(&params, t).ok()).collect(),
        ModelKind::Vasicek | ModelKind::Heston => {
            run.note("autocorrelation target is the shape e^{-alpha tau}, scaled to the first estimated lag");
            let first = ac.values[0];
            let t1 = ac.lags[0];
            ac.lags.iter().map(|&t| Some(first * (-params.alpha * (t - t1)).exp())).collect()
        }
    };
    run.write("autocorr.csv", curve_csv(&ac, &ac_analytic).as_bytes())?;
    run.finish()
}

fn param_string(f: &DensityFamily) -> String {
    f.parameters().iter().map(|(k, v)| format!("{k}={}", fmt_f64(*v))).collect::<Vec<_>>().join(";")
}

fn ranking_csv(report: &FitReport) -> String {
    let mut s = String::from("rank,family,loglik,aic,converged,n_evals,parameters\n");
    for (i, r) in report.ranked.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            i + 1,
            r.kind(),
            fmt_f64(r.loglik),
            fmt_f64(r.aic),
            r.converged,
            r.n_evals,
            param_string(&r.family)
        );
    }
    s
}

fn fitted_density_csv(samples: &[f64], report: &FitReport, kinds: &[FamilyKind]) -> CliResult<String> {
    let d = EmpiricalDensity::histogram(samples, Binning::FreedmanDiaconis)?;
    let extra: Vec<(&str, Vec<Option<f64>>)> = kinds
        .iter()
        .map(|&k| {
            let fit = report.get(k);
            (k.name(), d.grid.iter().map(|&x| fit.map(|f| f.family.pdf(x))).collect())
        })
        .collect();
    Ok(density_csv(&d, &extra))
}

pub fn cmd_fit(config: &RunConfig, out: &Path) -> CliResult<Outcome> {
    let section = &config.fit;
    let path = section
        .prices
        .as_ref()
        .ok_or_else(|| CliError::Usage("a price file is required (--prices or fit.prices)".into()))?;
    let bytes = fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let symbol = section
        .symbol
        .clone()
        .unwrap_or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
    let prices: PriceSeries = parse_prices(&bytes, &symbol)?;

    let mut run = Run::new("fit", config, out)?;
    run.manifest.input = Some(FileDigest { file: path.display().to_string(), sha256: sha256_hex(&bytes) });

    match section.what {
        FitWhat::Vol => {
            let proxy = volatility_proxy(&prices)?;
            let report = fit_all(&FamilyKind::VOLATILITY, &proxy);
            report_failures(&mut run, &report);
            run.write("fit_vol.json", (report.to_json() + "\n").as_bytes())?;
            run.write("vol_ranking.csv", ranking_csv(&report).as_bytes())?;
            run.write("vol_density.csv", fitted_density_csv(&proxy, &report, &FamilyKind::VOLATILITY)?.as_bytes())?;
        }
        FitWhat::Ret => {
            let returns = detrended_returns_from_closes(prices.closes())?;
            let report = fit_all(&FamilyKind::RETURNS, &returns);
            report_failures(&mut run, &report);
            run.write("fit_ret.json", (report.to_json() + "\n").as_bytes())?;
            run.write("ret_ranking.csv", ranking_csv(&report).as_bytes())?;
            run.write("ret_density.csv", fitted_density_csv(&returns, &report, &FamilyKind::RETURNS)?.as_bytes())?;
        }
        FitWhat::Horizons => {
            if section.horizons.is_empty() {
                return Err(CliError::Usage("at least one horizon is required".into()));
            }
            let densities = multi_horizon_densities(&prices, &section.horizons)?;
            let mut combined = String::from("horizon,shift,x,density,shifted_density\n");
            let mut summary = String::from(
                "horizon,windows,overlapping,effective_samples,mean,variance,skewness,excess_kurtosis\n",
            );
            for (shift, hd) in densities.iter().enumerate() {
                run.warn(&hd.density.warnings);
                run.write(&format!("horizon_{}.csv", hd.horizon), density_csv(&hd.density, &[]).as_bytes())?;
                let scale = 10f64.powi(-(shift as i32));
                for (x, p) in hd.density.grid.iter().zip(&hd.density.density) {
                    let _ = writeln!(
                        combined,
                        "{},{shift},{},{},{}",
                        hd.horizon,
                        fmt_f64(*x),
                        fmt_f64(*p),
                        fmt_f64(p * scale)
                    );
                }
                let m = &hd.moments;
                let _ = writeln!(
                    summary,
                    "{},{},{},{},{},{},{},{}",
                    hd.horizon,
                    m.n,
                    hd.overlapping,
                    fmt_f64(hd.effective_samples),
                    fmt_f64(m.mean),
                    fmt_f64(m.variance),
                    fmt_f64(m.skewness),
                    fmt_f64(m.excess_kurtosis)
                );
            }
            run.note("shifted_density = density * 10^-shift, one decade per horizon, for plotting only");
            run.write("horizons_combined.csv", combined.as_bytes())?;
            run.write("horizons_summary.csv", summary.as_bytes())?;
        }
    }
    run.finish()
}

fn report_failures(run: &mut Run, report: &FitReport) {
    for f in &report.failures {
        run.manifest.warnings.push(format!("{} fit failed: {}", f.family, f.error));
    }
}
