//! Command-line surface: Green-function curves, price and hedge ladders,
//! smearing kernels, synthetic chains and per-day calibration.
//!
//! Every command writes deterministic files plus a `<file>.manifest.json`
//! with the configuration, seed, version and SHA-256 of each output.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use clap::{Args, Parser, Subcommand};
use fracprice_core::calibration::{self, CalibrationConfig, FitResult, ModelKind, ModelParams, SideFilter};
use fracprice_core::dataio::{self, RunManifest, SynthConfig};
use fracprice_core::green::{self, ContourConfig, DerivativeKind, DiffusionSpec, MellinBarnes};
use fracprice_core::hedging::{HedgeModel, Hedger};
use fracprice_core::pricing::{bs_delta, bs_implied_vol, bs_price, DfPricer, OptionSide};
use fracprice_core::{par, Error};
use serde_json::json;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "FRACPRICE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "fracprice", version, about = "Double-fractional option pricing toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Green function g(ξ, τ) on a grid: columns xi, g, ln_g.
    Green(GreenArgs),
    /// Option prices over strike and maturity grids.
    Price(PriceArgs),
    /// Per-day calibration of an option chain.
    Calibrate(CalibrateArgs),
    /// Variance-optimal hedge ratio φ*(K) next to the Black-Scholes Δ(K).
    Hedge(HedgeArgs),
    /// Riesz-Feller and Caputo smearing kernels K(l, τ).
    Kernels(KernelArgs),
    /// Noisy synthetic option chain from known parameters.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct GreenArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long)]
    pub tau: f64,
    #[arg(long, default_value = "caputo")]
    pub kind: String,
    /// start:stop:count
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    /// bs | levy | df | df_rf
    #[arg(long)]
    pub model: String,
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Stable scale σ; the lognormal volatility for `bs`.
    #[arg(long)]
    pub sigma: f64,
}

#[derive(Debug, Args)]
pub struct PriceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "call")]
    pub side: String,
    #[arg(long)]
    pub spot: f64,
    /// A value or start:stop:count.
    #[arg(long, allow_hyphen_values = true)]
    pub strike: String,
    /// A value or start:stop:count.
    #[arg(long, allow_hyphen_values = true)]
    pub tau: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub rate: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub div: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub chain: PathBuf,
    /// bs | levy | df | df_rf | all
    #[arg(long, default_value = "all")]
    pub model: String,
    /// all | calls | puts
    #[arg(long, default_value = "all")]
    pub side: String,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct HedgeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "call")]
    pub side: String,
    #[arg(long)]
    pub spot: f64,
    /// A value or start:stop:count.
    #[arg(long, allow_hyphen_values = true)]
    pub strike: String,
    #[arg(long)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub rate: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub div: f64,
    /// Volatility for the Δ column; defaults to the model's implied volatility per strike.
    #[arg(long)]
    pub bs_vol: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub tau: f64,
    /// start:stop:count over l ≥ 0.
    #[arg(long)]
    pub grid: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value = "caputo")]
    pub kind: String,
    #[arg(long, default_value_t = 5)]
    pub days: usize,
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000.0)]
    pub spot: f64,
    #[arg(long, default_value_t = 0.01, allow_hyphen_values = true)]
    pub rate: f64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Failure of a CLI run.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(e) => e.kind(),
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }

    /// One-line machine-readable form.
    pub fn to_json(&self) -> String {
        json!({ "error": self.kind(), "message": self.message() }).to_string()
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

/// Parses `start:stop:count`; a count of 1 yields `start`.
pub fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return usage(format!("grid `{s}` must be start:stop:count"));
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| CliError::Usage(format!("bad grid start `{}`", parts[0])))?;
    let b: f64 = parts[1].trim().parse().map_err(|_| CliError::Usage(format!("bad grid stop `{}`", parts[1])))?;
    let n: usize = parts[2].trim().parse().map_err(|_| CliError::Usage(format!("bad grid count `{}`", parts[2])))?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return usage(format!("grid `{s}` needs finite bounds and count >= 1"));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect())
}

/// A single value or a grid.
pub fn parse_values(s: &str) -> CliResult<Vec<f64>> {
    if s.contains(':') {
        return parse_grid(s);
    }
    s.trim().parse::<f64>().map(|v| vec![v]).map_err(|_| CliError::Usage(format!("bad number `{s}`")))
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> CliResult<T> {
    Ok(s.parse::<T>()?)
}

fn write_output(path: &Path, body: &str, manifest: &mut RunManifest) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(Error::from)?;
    }
    std::fs::write(path, body).map_err(Error::from)?;
    manifest.add_output(path)?;
    Ok(())
}

/// Thread cap from the environment; absent or unparsable means no cap.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).filter(|&n: &usize| n > 0)
}

/// Parses arguments (without the program name's special handling) and runs.
pub fn run<I, T>(args: I) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    execute(cli.command)
}

pub fn execute(command: Command) -> CliResult<()> {
    par::with_threads(threads_from_env(), || match command {
        Command::Green(a) => green_cmd(&a),
        Command::Price(a) => price_cmd(&a),
        Command::Calibrate(a) => calibrate_cmd(&a),
        Command::Hedge(a) => hedge_cmd(&a),
        Command::Kernels(a) => kernels_cmd(&a),
        Command::Synth(a) => synth_cmd(&a),
    })
}

fn finish(manifest: RunManifest, primary: &Path) -> CliResult<()> {
    manifest.write(&RunManifest::path_for(primary))?;
    Ok(())
}

fn green_cmd(a: &GreenArgs) -> CliResult<()> {
    let kind: DerivativeKind = parse(&a.kind)?;
    let spec = DiffusionSpec::new(a.alpha, a.gamma, kind, a.sigma)?;
    if !(a.tau > 0.0) {
        return usage(format!("tau must be positive, got {}", a.tau));
    }
    let grid = parse_grid(&a.grid)?;
    let mb = MellinBarnes::new(&spec, &ContourConfig::adaptive(&spec))?;
    let values = par::map(par::ExecMode::Parallel, &grid, |&xi| {
        if xi == 0.0 {
            green::green_at_origin(&spec, a.tau)
        } else {
            mb.density(xi, a.tau)
        }
    });
    let mut body = String::from("xi\tg\tln_g\n");
    for (xi, g) in grid.iter().zip(values) {
        let g = g?;
        let ln = if g > 0.0 { g.ln() } else { f64::NEG_INFINITY };
        writeln!(body, "{xi}\t{g}\t{ln}").unwrap();
    }
    let config = json!({ "alpha": a.alpha, "gamma": a.gamma, "sigma": a.sigma, "tau": a.tau, "kind": a.kind, "grid": a.grid });
    let mut manifest = RunManifest::new("green", config, None);
    write_output(&a.out, &body, &mut manifest)?;
    finish(manifest, &a.out)
}

fn model_config(m: &ModelArgs) -> serde_json::Value {
    json!({ "model": m.model, "alpha": m.alpha, "gamma": m.gamma, "sigma": m.sigma })
}

/// Diffusion spec for a stable model, `None` for Black-Scholes.
fn model_spec(m: &ModelArgs) -> CliResult<(ModelKind, Option<DiffusionSpec>)> {
    let kind: ModelKind = parse(&m.model)?;
    let params = ModelParams { alpha: m.alpha, gamma: m.gamma, sigma: m.sigma };
    if kind == ModelKind::BlackScholes && !(m.sigma > 0.0) {
        return usage(format!("bs volatility must be positive, got {}", m.sigma));
    }
    Ok((kind, params.spec(kind)?))
}

fn price_cmd(a: &PriceArgs) -> CliResult<()> {
    let (_, spec) = model_spec(&a.model)?;
    let side: OptionSide = parse(&a.side)?;
    let strikes = parse_values(&a.strike)?;
    let taus = parse_values(&a.tau)?;
    let mut body = String::from("tau\tstrike\tprice\tquadrature_error\tdrift_mu\tmartingale_ok\n");
    let pricer = match &spec {
        Some(s) => Some(DfPricer::new(s, &taus)?),
        None => None,
    };
    for &tau in &taus {
        for &k in &strikes {
            let p = match &pricer {
                Some(p) => p.price(a.spot, k, tau, a.rate, a.div, side)?,
                None => bs_price(a.spot, k, tau, a.rate, a.div, a.model.sigma, side)?,
            };
            writeln!(body, "{tau}\t{k}\t{}\t{}\t{}\t{}", p.value, p.quadrature_error, p.drift_mu, p.martingale_ok).unwrap();
        }
    }
    let mut config = model_config(&a.model);
    config["side"] = json!(a.side);
    config["spot"] = json!(a.spot);
    config["strike"] = json!(a.strike);
    config["tau"] = json!(a.tau);
    config["rate"] = json!(a.rate);
    config["div"] = json!(a.div);
    let mut manifest = RunManifest::new("price", config, None);
    write_output(&a.out, &body, &mut manifest)?;
    finish(manifest, &a.out)
}

fn hedge_cmd(a: &HedgeArgs) -> CliResult<()> {
    let (kind, spec) = model_spec(&a.model)?;
    let side: OptionSide = parse(&a.side)?;
    let strikes = parse_values(&a.strike)?;
    let model = match spec {
        Some(s) => HedgeModel::Df(s),
        None => HedgeModel::Bs { vol: a.model.sigma },
    };
    let hedger = Hedger::new(model, a.spot, a.tau, a.rate, a.div)?;
    let pricer = match &spec {
        Some(s) => Some(DfPricer::new(s, &[a.tau])?),
        None => None,
    };
    let mut body = String::from("strike\tphi_star\tbs_delta\tbs_vol\trisk_phi_star\trisk_delta\tphi_literal\n");
    for &k in &strikes {
        let m = hedger.moments(k, side)?;
        let phi = m.optimal_phi();
        let vol = match (a.bs_vol, kind, &pricer) {
            (Some(v), _, _) => v,
            (None, ModelKind::BlackScholes, _) => a.model.sigma,
            (None, _, Some(p)) => {
                let c = p.price(a.spot, k, a.tau, a.rate, a.div, OptionSide::Call)?.value;
                bs_implied_vol(c, a.spot, k, a.tau, a.rate, a.div, OptionSide::Call)?
            }
            (None, _, None) => unreachable!("stable models always have a pricer"),
        };
        let mut delta = bs_delta(a.spot, k, a.tau, a.rate, a.div, vol)?;
        if side == OptionSide::Put {
            delta -= (-a.div * a.tau).exp();
        }
        let literal = hedger.literal_phi(k, side)?;
        writeln!(body, "{k}\t{phi}\t{delta}\t{vol}\t{}\t{}\t{literal}", m.risk(phi), m.risk(delta)).unwrap();
    }
    let mut config = model_config(&a.model);
    config["side"] = json!(a.side);
    config["spot"] = json!(a.spot);
    config["strike"] = json!(a.strike);
    config["tau"] = json!(a.tau);
    config["rate"] = json!(a.rate);
    config["div"] = json!(a.div);
    config["bs_vol"] = json!(a.bs_vol);
    let mut manifest = RunManifest::new("hedge", config, None);
    write_output(&a.out, &body, &mut manifest)?;
    finish(manifest, &a.out)
}

fn kernels_cmd(a: &KernelArgs) -> CliResult<()> {
    let grid = parse_grid(&a.grid)?;
    let mut body = String::from("l\trf\tcaputo\n");
    let rows = par::map(par::ExecMode::Parallel, &grid, |&l| -> CliResult<(f64, f64)> {
        let rf = green::smearing_kernel_rf(a.gamma, a.tau, l)?;
        let cap = green::smearing_kernel_caputo(a.gamma, a.tau, l)?;
        Ok((rf, cap))
    });
    for (l, row) in grid.iter().zip(rows) {
        let (rf, cap) = row?;
        writeln!(body, "{l}\t{rf}\t{cap}").unwrap();
    }
    let config = json!({ "gamma": a.gamma, "tau": a.tau, "grid": a.grid });
    let mut manifest = RunManifest::new("kernels", config, None);
    write_output(&a.out, &body, &mut manifest)?;
    finish(manifest, &a.out)
}

fn synth_cmd(a: &SynthArgs) -> CliResult<()> {
    let cfg = SynthConfig {
        alpha: a.alpha,
        gamma: a.gamma,
        sigma: a.sigma,
        kind: parse(&a.kind)?,
        days: a.days,
        noise: a.noise,
        seed: a.seed,
        spot: a.spot,
        rate: a.rate,
        ..SynthConfig::default()
    };
    let days = dataio::synthesize(&cfg)?;
    let config = json!({
        "alpha": a.alpha, "gamma": a.gamma, "sigma": a.sigma, "kind": a.kind, "days": a.days,
        "noise": a.noise, "spot": a.spot, "rate": a.rate,
    });
    let mut manifest = RunManifest::new("synth", config, Some(a.seed));
    write_output(&a.out, &dataio::format_chain(&days), &mut manifest)?;
    finish(manifest, &a.out)
}

/// Table-style row: model, days, mean and std of each parameter and of AE.
fn summary_tsv(fits: &[FitResult], rho: Option<(f64, f64)>, omega: Option<(f64, f64)>) -> String {
    let mut models: Vec<ModelKind> = Vec::new();
    for f in fits {
        if !models.contains(&f.model) {
            models.push(f.model);
        }
    }
    let mut out = String::from("model\tdays\talpha_mean\talpha_std\tgamma_mean\tgamma_std\tsigma_mean\tsigma_std\tae_mean\tae_std\n");
    for m in models {
        let sel: Vec<&FitResult> = fits.iter().filter(|f| f.model == m).collect();
        let col = |g: fn(&FitResult) -> f64| calibration::mean_std(&sel.iter().map(|f| g(f)).collect::<Vec<_>>()).unwrap_or((f64::NAN, f64::NAN));
        let (a, g, s, ae) = (col(|f| f.params.alpha), col(|f| f.params.gamma), col(|f| f.params.sigma), col(|f| f.ae));
        writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}", m.label(), sel.len(), a.0, a.1, g.0, g.1, s.0, s.1, ae.0, ae.1).unwrap();
    }
    if let Some((m, s)) = rho {
        writeln!(out, "rho\t\t{m}\t{s}\t\t\t\t\t\t").unwrap();
    }
    if let Some((m, s)) = omega {
        writeln!(out, "omega\t\t{m}\t{s}\t\t\t\t\t\t").unwrap();
    }
    out
}

fn calibrate_cmd(a: &CalibrateArgs) -> CliResult<()> {
    let days = dataio::load_chain(&a.chain)?;
    let cfg = CalibrationConfig { restarts: a.restarts, seed: a.seed, side_filter: parse::<SideFilter>(&a.side)?, ..CalibrationConfig::default() };
    cfg.validate()?;
    let (fits, failures, rho, omega) = if a.model.eq_ignore_ascii_case("all") {
        let report = calibration::fit_series(&days, &cfg)?;
        let failures: Vec<String> = report.days.iter().flat_map(|d| d.failures.iter().map(move |f| format!("{}: {f}", d.date))).collect();
        let fits: Vec<FitResult> = report.days.iter().flat_map(|d| d.fits.clone()).collect();
        (fits, failures, report.summary.rho, report.summary.omega)
    } else {
        let model: ModelKind = parse(&a.model)?;
        let cfg = CalibrationConfig { df_kind: match model {
            ModelKind::DoubleFractional(k) => k,
            _ => cfg.df_kind,
        }, ..cfg };
        let results = par::map(par::ExecMode::Parallel, &days, |d| calibration::fit_day(d, model, &cfg));
        let mut fits = Vec::new();
        let mut failures = Vec::new();
        for (d, r) in days.iter().zip(results) {
            match r {
                Ok(f) => fits.push(f),
                Err(e) => failures.push(format!("{}: {}: {e}", d.date, model.label())),
            }
        }
        (fits, failures, None, None)
    };
    std::fs::create_dir_all(&a.out).map_err(Error::from)?;
    let config = json!({
        "chain": a.chain.display().to_string(),
        "chain_sha256": dataio::sha256_file(&a.chain)?,
        "model": a.model, "side": a.side, "restarts": a.restarts,
        "simplex_tol": cfg.simplex_tol, "max_evals": cfg.max_evals,
    });
    let mut manifest = RunManifest::new("calibrate", config, Some(a.seed));
    let fits_path = a.out.join("fits.jsonl");
    dataio::write_fits(&fits_path, &fits)?;
    manifest.add_output(&fits_path)?;
    let mut series = String::from("date\tmodel\talpha\tgamma\tsigma\tae\tn_quotes\tconverged\tdegenerate\n");
    for f in &fits {
        let date = f.date.map(|d| d.to_string()).unwrap_or_default();
        writeln!(series, "{date}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}", f.model.label(), f.params.alpha, f.params.gamma, f.params.sigma, f.ae, f.n_quotes, f.converged, f.degenerate).unwrap();
    }
    write_output(&a.out.join("series.tsv"), &series, &mut manifest)?;
    write_output(&a.out.join("summary.tsv"), &summary_tsv(&fits, rho, omega), &mut manifest)?;
    let summary = json!({ "rho": rho, "omega": omega, "failures": failures });
    write_output(&a.out.join("summary.json"), &format!("{}\n", serde_json::to_string_pretty(&summary).unwrap()), &mut manifest)?;
    manifest.write(&a.out.join("run.manifest.json"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("-1:1:3").unwrap(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(parse_grid("2:5:1").unwrap(), vec![2.0]);
        assert_eq!(parse_grid("-5:5:101").unwrap()[100], 5.0);
        assert!(parse_grid("1:2").is_err() && parse_grid("1:2:0").is_err() && parse_grid("a:2:3").is_err());
        assert_eq!(parse_values("1.5").unwrap(), vec![1.5]);
    }

    #[test]
    fn error_json_is_valid() {
        let e = CliError::Core(Error::EmptyFile);
        let v: serde_json::Value = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(v["error"], "empty_file");
        let u = run(["fracprice", "green", "--alpha", "x"]).unwrap_err();
        assert_eq!(u.kind(), "usage");
    }
}
