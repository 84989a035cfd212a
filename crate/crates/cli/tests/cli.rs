//! End-to-end tests of the `svlab` binary and its library entry point.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::NaiveDate;
use svlab_core::estimators::{CorrelationCurve, EmpiricalDensity};
use svlab_core::simulate::{simulate_paths_from, InitialState, PathConfig, PathSet};
use svlab_core::ModelParams;

fn svlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svlab")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn out_dir(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

const VASICEK: &str = "seed = 3\n[model]\nkind = \"vasicek\"\nalpha = 0.1\nm = 0.01\nk = 0.001\nrho = -0.5\n";

fn price_csv(days: usize, seed: u64) -> String {
    let p = ModelParams::exp_ou(10.0, 20f64.sqrt(), -0.4);
    let paths = simulate_paths_from(&p, &PathConfig::new(1.0 / 252.0, days, 1, seed), InitialState::Stationary).unwrap();
    let start = NaiveDate::from_ymd_opt(2000, 1, 3).unwrap();
    let mut s = String::from("Date,Open,High,Low,Close,Volume\n");
    for (i, c) in paths.prices(0).iter().enumerate() {
        let d = start + chrono::Days::new(i as u64);
        s.push_str(&format!("{d},1,1,1,{c},100\n"));
    }
    s
}

#[test]
fn smallest_simulation_writes_eleven_rows_and_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", &format!("{VASICEK}[paths]\nn_paths = 1\nn_steps = 10\n"));
    let out = out_dir(tmp.path(), "o");
    let o = svlab(&["simulate", "--config", &cfg, "--out", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(Path::new(&out).join("paths.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 11);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(Path::new(&out).join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["outputs"][0]["file"], "paths.csv");
    assert_eq!(manifest["outputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn reruns_are_byte_identical_and_paths_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", &format!("{VASICEK}[paths]\nn_paths = 3\nn_steps = 50\nrecord_stride = 5\n"));
    let (a, b) = (out_dir(tmp.path(), "a"), out_dir(tmp.path(), "b"));
    for out in [&a, &b] {
        assert!(svlab(&["simulate", "--config", &cfg, "--out", out]).status.success());
        assert!(svlab(&["simulate", "--config", &cfg, "--out", &format!("{out}/bin"), "--format", "binary"])
            .status
            .success());
    }
    for f in ["paths.csv", "manifest.json", "bin/paths.bin", "bin/manifest.json"] {
        assert_eq!(fs::read(Path::new(&a).join(f)).unwrap(), fs::read(Path::new(&b).join(f)).unwrap(), "{f}");
    }

    let params = ModelParams::vasicek(0.1, 0.01, 0.001, -0.5);
    let config = PathConfig::new(0.01, 50, 3, 3).with_stride(5);
    let from_csv = PathSet::read_csv(fs::read(Path::new(&a).join("paths.csv")).unwrap().as_slice(), params, config).unwrap();
    let from_bin = PathSet::read_binary(fs::read(Path::new(&a).join("bin/paths.bin")).unwrap().as_slice()).unwrap();
    assert_eq!(from_csv, from_bin);
}

#[test]
fn seed_override_changes_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", &format!("{VASICEK}[paths]\nn_steps = 20\n"));
    let (a, b) = (out_dir(tmp.path(), "a"), out_dir(tmp.path(), "b"));
    assert!(svlab(&["simulate", "--config", &cfg, "--out", &a]).status.success());
    assert!(svlab(&["simulate", "--config", &cfg, "--out", &b, "--seed", "4"]).status.success());
    assert_ne!(fs::read(format!("{a}/paths.csv")).unwrap(), fs::read(format!("{b}/paths.csv")).unwrap());
}

#[test]
fn coarse_time_step_warns_but_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", &format!("{VASICEK}[paths]\ndt = 2.0\nn_steps = 10\n"));
    let o = svlab(&["simulate", "--config", &cfg, "--out", &out_dir(tmp.path(), "o")]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning:"), "{}", stderr(&o));
    assert!(stderr(&o).contains("alpha"), "{}", stderr(&o));
}

#[test]
fn config_errors_exit_with_usage_code() {
    let tmp = tempfile::tempdir().unwrap();
    let unknown = write(tmp.path(), "u.toml", &format!("{VASICEK}[paths]\nn_step = 10\n"));
    let o = svlab(&["simulate", "--config", &unknown, "--out", &out_dir(tmp.path(), "o")]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("n_step") && msg.contains("line"), "{msg}");

    let bad = write(tmp.path(), "b.toml", "[model]\nkind = \"vasicek\"\nalpha = -1\nm = 0.1\nk = 0.1\nrho = 0\n");
    let o = svlab(&["simulate", "--config", &bad, "--out", &out_dir(tmp.path(), "o")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("alpha"), "{}", stderr(&o));

    let o = svlab(&["simulate", "--out", &out_dir(tmp.path(), "o")]);
    assert_eq!(o.status.code(), Some(2), "missing model section");

    let o = svlab(&["simulate", "--threads", "0", "--config", &bad]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn blow_up_exits_with_numerical_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        "[model]\nkind = \"exp_ou\"\nalpha = 1e-6\nk = 50\nrho = 0\n[paths]\ndt = 1\nn_steps = 2000\n",
    );
    let o = svlab(&["simulate", "--config", &cfg, "--out", &out_dir(tmp.path(), "o")]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("non-finite"), "{}", stderr(&o));
}

#[test]
fn empty_horizon_list_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", &format!("{VASICEK}[pdf]\nhorizons = []\n"));
    let o = svlab(&["pdf", "--config", &cfg, "--out", &out_dir(tmp.path(), "o")]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

fn summary_column(out: &str, column: &str) -> Vec<f64> {
    let text = fs::read_to_string(Path::new(out).join("pdf_summary.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == column).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn heston_twenty_day_density_is_normalized_and_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        "[model]\nkind = \"heston\"\nalpha = 0.1\nm = 1e-4\nk = 3e-3\nrho = -0.5\n[pdf]\nhorizons = [20]\nn_paths = 20000\ndt = 0.25\n",
    );
    let out = out_dir(tmp.path(), "o");
    assert!(svlab(&["pdf", "--config", &cfg, "--out", &out]).status.success());
    assert!((summary_column(&out, "normalization")[0] - 1.0).abs() < 1e-3);
    let d = EmpiricalDensity::read_csv(fs::read(format!("{out}/pdf_h20.csv")).unwrap().as_slice()).unwrap();
    assert!((d.trapezoid_mass() - 1.0).abs() < 1e-3);
}

#[test]
fn exp_ou_kurtosis_falls_with_horizon() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        "seed = 5\n[model]\nkind = \"exp_ou\"\nalpha = 0.5\nk = 0.5\nrho = -0.4\n[pdf]\nhorizons = [1, 5, 20, 250]\nmethod = \"cf\"\n",
    );
    let out = out_dir(tmp.path(), "o");
    let o = svlab(&["pdf", "--config", &cfg, "--out", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    for h in [1, 5, 20, 250] {
        assert!(Path::new(&out).join(format!("pdf_h{h}.csv")).exists());
    }
    let kurt = summary_column(&out, "excess_kurtosis");
    assert!(kurt.windows(2).all(|w| w[1] < w[0]), "{kurt:?}");
    for n in summary_column(&out, "normalization") {
        assert!((n - 1.0).abs() < 1e-3);
    }
}

fn read_curve(path: PathBuf) -> (CorrelationCurve, Vec<Option<f64>>) {
    let bytes = fs::read(&path).unwrap();
    let curve = CorrelationCurve::read_csv(bytes.as_slice()).unwrap();
    let analytic = String::from_utf8(bytes)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().ok())
        .collect();
    (curve, analytic)
}

#[test]
fn exp_ou_example_config_autocorrelation_covers_analytic_curve() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/exp_ou.toml");
    let out = out_dir(tmp.path(), "o");
    let o = svlab(&["correlations", "--config", cfg, "--out", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (ac, analytic) = read_curve(Path::new(&out).join("autocorr.csv"));
    // max_lag 250 stays inside the first two decay constants (2/alpha = 400 days)
    let within = ac
        .values
        .iter()
        .zip(&ac.stderr)
        .zip(&analytic)
        .filter(|((v, s), a)| (*v - a.unwrap()).abs() <= 3.0 * *s)
        .count();
    assert!(within as f64 / ac.values.len() as f64 >= 0.9, "{within}/{}", ac.values.len());
    let (lev, lev_analytic) = read_curve(Path::new(&out).join("leverage.csv"));
    assert_eq!(lev.values.len(), 250);
    assert!(lev_analytic.iter().all(Option::is_some));
}

#[test]
fn heston_leverage_has_no_analytic_column_and_short_series_warns() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        "[model]\nkind = \"heston\"\nalpha = 0.02\nm = 1e-4\nk = 1e-3\nrho = -0.5\n[correlations]\nmax_lag = 40\n",
    );
    let out = out_dir(tmp.path(), "o");
    let o = svlab(&["correlations", "--config", &cfg, "--out", &out, "--years", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let msg = stderr(&o);
    assert!(msg.contains("note:") && msg.contains("heston"), "{msg}");
    assert!(msg.contains("warning:"), "one year of data should be flagged: {msg}");
    let (_, analytic) = read_curve(Path::new(&out).join("leverage.csv"));
    assert!(analytic.iter().all(Option::is_none));
    let header = fs::read_to_string(Path::new(&out).join("leverage.csv")).unwrap();
    assert!(header.starts_with("lag,value,stderr,analytic\n"));
}

#[test]
fn bad_price_rows_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let mut csv = price_csv(60, 1);
    csv = csv.replacen("\n2000-01-10,1,1,1,", "\n2000-01-10,1,1,1,-", 1);
    let prices = write(tmp.path(), "p.csv", &csv);
    let o = svlab(&["fit", "--prices", &prices, "--out", &out_dir(tmp.path(), "o")]);
    assert_eq!(o.status.code(), Some(2));
    // header is line 1, 2000-01-03 is line 2
    assert!(stderr(&o).contains("row 9"), "{}", stderr(&o));

    let prices = write(tmp.path(), "q.csv", "Date,Close\n2000-01-03,1\n03/01/2000,2\n");
    let o = svlab(&["fit", "--prices", &prices, "--out", &out_dir(tmp.path(), "o")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row 3"), "{}", stderr(&o));
}

fn ranking(out: &str, file: &str) -> Vec<String> {
    fs::read_to_string(Path::new(out).join(file))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().to_string())
        .collect()
}

#[test]
fn fit_outputs_are_order_insensitive_and_rank_log_normal_first() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = price_csv(3000, 2);
    let mut lines: Vec<&str> = csv.lines().collect();
    let header = lines.remove(0);
    let mut shuffled = lines.clone();
    // deterministic shuffle
    for i in (1..shuffled.len()).rev() {
        shuffled.swap(i, (i * 7919 + 13) % (i + 1));
    }
    let sorted = write(tmp.path(), "sorted.csv", &csv);
    let mixed = write(tmp.path(), "mixed.csv", &format!("{header}\n{}\n", shuffled.join("\n")));
    assert_ne!(fs::read(&sorted).unwrap(), fs::read(&mixed).unwrap());

    let (a, b) = (out_dir(tmp.path(), "a"), out_dir(tmp.path(), "b"));
    for what in ["vol", "ret"] {
        let oa = svlab(&["fit", "--prices", &sorted, "--what", what, "--out", &format!("{a}/{what}")]);
        let ob = svlab(&["fit", "--prices", &mixed, "--what", what, "--out", &format!("{b}/{what}")]);
        assert!(oa.status.success() && ob.status.success(), "{}", stderr(&oa));
        for f in [format!("fit_{what}.json"), format!("{what}_ranking.csv"), format!("{what}_density.csv")] {
            assert_eq!(
                fs::read(format!("{a}/{what}/{f}")).unwrap(),
                fs::read(format!("{b}/{what}/{f}")).unwrap(),
                "{f}"
            );
        }
    }
    assert_eq!(ranking(&format!("{a}/vol"), "vol_ranking.csv")[0], "log_normal");
    assert_eq!(ranking(&format!("{a}/ret"), "ret_ranking.csv")[0], "student_t");
    let d = EmpiricalDensity::read_csv(fs::read(format!("{a}/vol/vol_density.csv")).unwrap().as_slice()).unwrap();
    assert!(d.density.iter().all(|v| *v >= 0.0));
}

#[test]
fn fit_horizons_writes_one_file_per_horizon_plus_combined() {
    let tmp = tempfile::tempdir().unwrap();
    let prices = write(tmp.path(), "p.csv", &price_csv(3000, 3));
    let out = out_dir(tmp.path(), "o");
    let o = svlab(&["fit", "--prices", &prices, "--what", "horizons", "--horizons", "1,5,20", "--out", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    for h in [1, 5, 20] {
        let d = EmpiricalDensity::read_csv(fs::read(format!("{out}/horizon_{h}.csv")).unwrap().as_slice()).unwrap();
        assert!((d.trapezoid_mass() - 1.0).abs() < 1e-9);
    }
    let combined = fs::read_to_string(format!("{out}/horizons_combined.csv")).unwrap();
    let mut lines = combined.lines();
    assert_eq!(lines.next().unwrap(), "horizon,shift,x,density,shifted_density");
    let mut shifts = std::collections::BTreeMap::new();
    for l in lines {
        let c: Vec<&str> = l.split(',').collect();
        shifts.insert(c[0].to_string(), c[1].to_string());
        let (d, s, shift): (f64, f64, i32) = (c[3].parse().unwrap(), c[4].parse().unwrap(), c[1].parse().unwrap());
        assert!((s - d * 10f64.powi(-shift)).abs() <= 1e-12 * d.abs().max(1.0));
    }
    let got: Vec<(String, String)> = shifts.into_iter().collect();
    let want = [("1", "0"), ("20", "2"), ("5", "1")];
    assert_eq!(got.len(), 3);
    for ((h, s), (wh, ws)) in got.iter().zip(want) {
        assert_eq!((h.as_str(), s.as_str()), (wh, ws));
    }
    let summary = fs::read_to_string(format!("{out}/horizons_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
}

#[test]
fn config_reference_lists_every_key() {
    let o = svlab(&["config-reference"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for key in ["model.alpha", "paths.dt", "pdf.horizons", "correlations.max_lag", "fit.what", "seed"] {
        assert!(text.contains(key), "{key}");
    }
}
