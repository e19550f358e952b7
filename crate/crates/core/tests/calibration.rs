use chrono::NaiveDate;
use fracprice_core::calibration::*;
use fracprice_core::dataio::{synthesize, SynthConfig};
use fracprice_core::green::DerivativeKind;
use fracprice_core::pricing::{bs_price, MarketSnapshot, OptionQuote, OptionSide};
use rand::seq::SliceRandom;
use rand::SeedableRng;

fn bs_day(vol: f64) -> MarketSnapshot {
    let (s, r, q) = (1000.0, 0.01, 0.005);
    let mut quotes = Vec::new();
    for &tau in &[0.25, 0.5, 1.0] {
        for i in 0..10 {
            let k = 800.0 + 45.0 * i as f64;
            for side in [OptionSide::Call, OptionSide::Put] {
                let mid = bs_price(s, k, tau, r, q, vol, side).unwrap().value;
                quotes.push(OptionQuote::new(side, k, tau, mid).unwrap());
            }
        }
    }
    MarketSnapshot { date: NaiveDate::from_ymd_opt(2008, 11, 3).unwrap(), spot: s, rate: r, div_yield: q, quotes }
}

#[test]
fn black_scholes_volatility_is_recovered() {
    let fit = fit_day(&bs_day(0.27), ModelKind::BlackScholes, &CalibrationConfig::default()).unwrap();
    assert!((fit.params.sigma - 0.27).abs() < 1e-4, "{:?}", fit.params);
    assert!(fit.converged && fit.ae < 0.1 && fit.n_quotes == 30, "{fit:?}");
}

#[test]
fn levy_stable_parameters_are_recovered_from_clean_quotes() {
    let cfg = SynthConfig { alpha: 1.7, gamma: 1.0, sigma: 0.12, days: 1, noise: 0.0, ..SynthConfig::default() };
    let day = &synthesize(&cfg).unwrap()[0];
    let fit = fit_day(day, ModelKind::LevyStable, &CalibrationConfig::default()).unwrap();
    assert!((fit.params.alpha - 1.7).abs() < 2e-3 && (fit.params.sigma - 0.12).abs() < 2e-3, "{:?}", fit.params);
    assert_eq!(fit.params.gamma, 1.0);
}

#[test]
fn error_is_invariant_under_quote_permutation() {
    let cfg = SynthConfig { days: 1, ..SynthConfig::default() };
    let day = synthesize(&cfg).unwrap().remove(0);
    let p = ModelParams { alpha: 1.55, gamma: 0.97, sigma: 0.14 };
    let model = ModelKind::DoubleFractional(DerivativeKind::Caputo);
    let base = aggregated_error(model, &p, &day, SideFilter::All).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let mut shuffled = day.clone();
        shuffled.quotes.shuffle(&mut rng);
        assert_eq!(aggregated_error(model, &p, &shuffled, SideFilter::All).unwrap().to_bits(), base.to_bits());
    }
}

#[test]
fn side_filter_restricts_quotes() {
    let day = bs_day(0.2);
    let cfg = CalibrationConfig { side_filter: SideFilter::CallsOnly, ..CalibrationConfig::default() };
    let calls = fit_day(&day, ModelKind::BlackScholes, &cfg).unwrap();
    let puts = fit_day(&day, ModelKind::BlackScholes, &CalibrationConfig { side_filter: SideFilter::PutsOnly, ..cfg }).unwrap();
    assert_eq!(calls.n_quotes + puts.n_quotes, otm_filter(&day).len());
    assert!(calls.n_quotes > 0 && puts.n_quotes > 0);
}

#[test]
fn fits_are_deterministic_for_a_seed() {
    let day = bs_day(0.31);
    let cfg = CalibrationConfig { seed: 42, ..CalibrationConfig::default() };
    let a = fit_day(&day, ModelKind::BlackScholes, &cfg).unwrap();
    let b = fit_day(&day, ModelKind::BlackScholes, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_validation() {
    assert!(CalibrationConfig { restarts: 0, ..CalibrationConfig::default() }.validate().is_err());
    let mut bad = CalibrationConfig::default();
    bad.bounds.alpha = (0.9, 2.0);
    assert!(bad.validate().is_err());
    assert!("garch".parse::<ModelKind>().is_err());
    assert_eq!("df_rf".parse::<ModelKind>().unwrap(), ModelKind::DoubleFractional(DerivativeKind::RieszFeller));
}
