use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use svlab_core::analytic::DensityFamily;
use svlab_core::calibrate::{fit_mle, fit_returns, fit_volatility_all, FamilyKind, PriceSeries};
use svlab_core::estimators::{empirical_cf_on_grid, invert_cf, FrequencyGrid, InversionOptions};
use svlab_core::simulate::PathConfig;
use svlab_core::ModelParams;

fn draws(family: &DensityFamily, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| family.sample(&mut rng)).collect()
}

fn within(got: f64, want: f64, rel: f64) -> bool {
    (got / want - 1.0).abs() <= rel
}

#[test]
fn parameter_recovery_on_direct_draws() {
    let cases = [
        (FamilyKind::Normal, DensityFamily::normal(0.5, 2.0).unwrap()),
        (FamilyKind::Gamma, DensityFamily::gamma(1.111, 0.036).unwrap()),
        (FamilyKind::LogNormal, DensityFamily::log_normal(-3.0, 0.6).unwrap()),
        (FamilyKind::StudentT, DensityFamily::student_t(0.2, 0.015, 4.0).unwrap()),
    ];
    for (i, (kind, truth)) in cases.iter().enumerate() {
        let s = draws(truth, 100_000, 100 + i as u64);
        let fit = fit_mle(*kind, &s).unwrap();
        assert!(fit.converged, "{kind}");
        let got = fit.family.parameters();
        for ((name, want), (_, g)) in truth.parameters().iter().zip(&got) {
            let tol = if *name == "dof" { 0.15 } else { 0.05 };
            assert!(within(*g, *want, tol), "{kind} {name}: {g} vs {want}");
        }
    }
}

#[test]
fn cf_round_trip_reproduces_each_family() {
    let families = [
        DensityFamily::normal(0.0, 1.0).unwrap(),
        DensityFamily::gamma(5.0, 1.0).unwrap(),
        DensityFamily::log_normal(0.0, 0.25).unwrap(),
        DensityFamily::student_t(0.0, 1.0, 5.0).unwrap(),
    ];
    for (i, fam) in families.iter().enumerate() {
        let s = draws(fam, 1_000_000, 7 + i as u64);
        let grid = FrequencyGrid::for_samples(&s, FrequencyGrid::DEFAULT_POINTS).unwrap();
        let phi = empirical_cf_on_grid(&s, &grid).unwrap();
        let d = invert_cf(&phi, &grid, &InversionOptions::for_samples(&s, 4.0 * grid.dx())).unwrap();
        let peak = (0..d.len()).map(|k| fam.pdf(d.grid[k])).fold(0.0, f64::max);
        let err = (0..d.len()).map(|k| (d.density[k] - fam.pdf(d.grid[k])).abs()).fold(0.0, f64::max);
        assert!(err < 0.02 * peak, "{fam}: sup error {err} vs peak {peak}");
        assert!((d.trapezoid_mass() - 1.0).abs() < 1e-3);
    }
}

fn synthetic_prices(params: &ModelParams, days: usize, seed: u64) -> PriceSeries {
    // rates per year, one step per trading day
    let dt = 1.0 / 252.0;
    let cfg = PathConfig::new(dt, days, 1, seed);
    let ps = svlab_core::simulate::simulate_paths(params, &cfg).unwrap();
    let start = NaiveDate::from_ymd_opt(1990, 1, 1).unwrap();
    PriceSeries::from_closes("SYN", start, ps.prices(0)).unwrap()
}

#[test]
fn heston_proxy_prefers_gamma_over_normal() {
    let p = ModelParams::heston(4.0, 0.09, 0.5, -0.5);
    assert!(p.feller_satisfied());
    let prices = synthetic_prices(&p, 10_000, 3);
    let rep = fit_volatility_all(&prices).unwrap();
    let g = rep.get(FamilyKind::Gamma).unwrap().loglik;
    let n = rep.get(FamilyKind::Normal).unwrap().loglik;
    assert!(g >= n, "gamma {g} normal {n}");
}

#[test]
fn heavy_tailed_returns_prefer_student_t() {
    let p = ModelParams::exp_ou(2.0, 2.0, -0.4).with_y0(-1.5);
    let prices = synthetic_prices(&p, 10_000, 4);
    let rep = fit_returns(&prices, &FamilyKind::RETURNS).unwrap();
    assert_eq!(rep.best().unwrap().kind(), FamilyKind::StudentT);
}

#[test]
fn gaussian_returns_proxy_is_folded_normal_and_fits_run() {
    let p = ModelParams::vasicek(1.0, 0.2, 1e-12, 0.0);
    let prices = synthetic_prices(&p, 3_000, 5);
    let rep = fit_volatility_all(&prices).unwrap();
    assert_eq!(rep.ranked.len(), 3, "{:?}", rep.failures);
}
