//! Per-day calibration by minimizing the aggregated absolute price error
//! over out-of-the-money quotes, and the series runner that compares the
//! Black-Scholes, log-stable and double-fractional fits.

pub mod nelder_mead;

pub use nelder_mead::{minimize, Minimum, SimplexOptions};

use crate::error::{Error, Result};
use crate::green::{DerivativeKind, DiffusionSpec};
use crate::par::{self, ExecMode};
use crate::pricing::{bs_price, DfPricer, MarketSnapshot, OptionQuote, OptionSide};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Minimum number of quotes a fit needs after filtering.
pub const MIN_QUOTES: usize = 5;
/// For γ > 1 the fit keeps γ ≤ α − GAMMA_GAP.
pub const GAMMA_GAP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    BlackScholes,
    LevyStable,
    DoubleFractional(DerivativeKind),
}

impl ModelKind {
    pub fn dim(&self) -> usize {
        match self {
            Self::BlackScholes => 1,
            Self::LevyStable => 2,
            Self::DoubleFractional(_) => 3,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::BlackScholes => "bs",
            Self::LevyStable => "levy",
            Self::DoubleFractional(DerivativeKind::Caputo) => "df",
            Self::DoubleFractional(DerivativeKind::RieszFeller) => "df_rf",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bs" | "black_scholes" | "black-scholes" => Ok(Self::BlackScholes),
            "levy" | "ls" | "levy_stable" | "stable" => Ok(Self::LevyStable),
            "df" | "df_caputo" | "double_fractional" => Ok(Self::DoubleFractional(DerivativeKind::Caputo)),
            "df_rf" | "df-rf" => Ok(Self::DoubleFractional(DerivativeKind::RieszFeller)),
            other => Err(Error::Domain(format!("unknown model `{other}`"))),
        }
    }
}

/// Model parameters. Black-Scholes uses only `sigma`, as lognormal
/// volatility; the stable models use σ as the stable scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub gamma: f64,
    pub sigma: f64,
}

impl ModelParams {
    pub fn bs(sigma: f64) -> Self {
        Self { alpha: 2.0, gamma: 1.0, sigma }
    }

    /// Ω = γ/α.
    pub fn omega(&self) -> f64 {
        self.gamma / self.alpha
    }

    pub fn spec(&self, model: ModelKind) -> Result<Option<DiffusionSpec>> {
        Ok(match model {
            ModelKind::BlackScholes => None,
            ModelKind::LevyStable => Some(DiffusionSpec::levy(self.alpha, self.sigma)?),
            ModelKind::DoubleFractional(kind) => Some(DiffusionSpec::new(self.alpha, self.gamma, kind, self.sigma)?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SideFilter {
    #[default]
    All,
    CallsOnly,
    PutsOnly,
}

impl SideFilter {
    pub fn keeps(&self, side: OptionSide) -> bool {
        match self {
            Self::All => true,
            Self::CallsOnly => side == OptionSide::Call,
            Self::PutsOnly => side == OptionSide::Put,
        }
    }
}

impl std::str::FromStr for SideFilter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(Self::All),
            "calls" | "call" | "calls_only" => Ok(Self::CallsOnly),
            "puts" | "put" | "puts_only" => Ok(Self::PutsOnly),
            other => Err(Error::Domain(format!("unknown side filter `{other}`"))),
        }
    }
}

/// Closed parameter intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub alpha: (f64, f64),
    pub gamma: (f64, f64),
    pub sigma: (f64, f64),
}

impl Default for Bounds {
    fn default() -> Self {
        Self { alpha: (1.05, 2.0), gamma: (0.5, 1.5), sigma: (1e-4, 2.0) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    pub bounds: Bounds,
    /// Low-discrepancy starting points per fit.
    pub restarts: usize,
    /// Convergence threshold on the simplex diameter in transformed coordinates.
    pub simplex_tol: f64,
    /// Objective evaluations per restart.
    pub max_evals: usize,
    pub side_filter: SideFilter,
    /// Derivative kind of the double-fractional fit in a series.
    pub df_kind: DerivativeKind,
    /// Offsets the low-discrepancy sequence.
    pub seed: u64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            bounds: Bounds::default(),
            restarts: 8,
            simplex_tol: 1e-4,
            max_evals: 300,
            side_filter: SideFilter::All,
            df_kind: DerivativeKind::Caputo,
            seed: 0,
        }
    }
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<()> {
        let b = &self.bounds;
        let ok = |(lo, hi): (f64, f64)| lo < hi && lo.is_finite() && hi.is_finite();
        if !(ok(b.alpha) && b.alpha.0 > 1.0 && b.alpha.1 <= 2.0) {
            return Err(Error::Domain(format!("alpha bounds must lie in (1, 2], got {:?}", b.alpha)));
        }
        if !(ok(b.gamma) && b.gamma.0 > 0.0 && b.gamma.1 < 2.0) {
            return Err(Error::Domain(format!("gamma bounds must lie in (0, 2), got {:?}", b.gamma)));
        }
        if b.gamma.0 >= b.alpha.0 - GAMMA_GAP || b.alpha.0 - GAMMA_GAP < 1.0 {
            return Err(Error::Domain("alpha lower bound must exceed max(1, gamma lower bound) + gap".into()));
        }
        if !(ok(b.sigma) && b.sigma.0 > 0.0) {
            return Err(Error::Domain(format!("sigma bounds must be positive, got {:?}", b.sigma)));
        }
        if self.restarts < 1 || !(self.simplex_tol > 0.0) || self.max_evals < 10 {
            return Err(Error::Domain("need restarts >= 1, simplex_tol > 0, max_evals >= 10".into()));
        }
        Ok(())
    }
}

/// One fitted model on one day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub date: Option<chrono::NaiveDate>,
    pub model: ModelKind,
    pub params: ModelParams,
    pub ae: f64,
    pub n_quotes: usize,
    pub converged: bool,
    /// Quotes carry no information (all mids zero); parameters sit at a bound.
    pub degenerate: bool,
    pub evals: usize,
}

/// Calls with K > F and puts with K < F, F = S e^{(r−q)τ}; K = F is dropped.
pub fn otm_filter(snapshot: &MarketSnapshot) -> Vec<OptionQuote> {
    snapshot
        .quotes
        .iter()
        .filter(|q| {
            let f = snapshot.forward(q.maturity);
            match q.side {
                OptionSide::Call => q.strike > f,
                OptionSide::Put => q.strike < f,
            }
        })
        .copied()
        .collect()
}

fn selected(snapshot: &MarketSnapshot, side: SideFilter) -> Vec<OptionQuote> {
    otm_filter(snapshot).into_iter().filter(|q| side.keeps(q.side)).collect()
}

/// Model prices of `quotes`, in order.
pub fn model_prices(model: ModelKind, params: &ModelParams, snapshot: &MarketSnapshot, quotes: &[OptionQuote]) -> Result<Vec<f64>> {
    let (s, r, q) = (snapshot.spot, snapshot.rate, snapshot.div_yield);
    match params.spec(model)? {
        None => quotes.iter().map(|o| bs_price(s, o.strike, o.maturity, r, q, params.sigma, o.side).map(|p| p.value)).collect(),
        Some(spec) => {
            let mut taus: Vec<f64> = quotes.iter().map(|o| o.maturity).collect();
            taus.sort_by(f64::total_cmp);
            taus.dedup();
            if taus.is_empty() {
                return Ok(Vec::new());
            }
            let pricer = DfPricer::with_mode(&spec, &taus, ExecMode::Sequential)?;
            quotes.iter().map(|o| pricer.price(s, o.strike, o.maturity, r, q, o.side).map(|p| p.value)).collect()
        }
    }
}

fn sorted_sum(mut errs: Vec<f64>) -> f64 {
    errs.sort_by(f64::total_cmp);
    errs.iter().sum()
}

/// AE = Σ |O_model − O_market| over the OTM quotes kept by `side`, summed in
/// ascending order so the value does not depend on quote order.
pub fn aggregated_error(model: ModelKind, params: &ModelParams, snapshot: &MarketSnapshot, side: SideFilter) -> Result<f64> {
    let quotes = selected(snapshot, side);
    let prices = model_prices(model, params, snapshot, &quotes)?;
    Ok(sorted_sum(quotes.iter().zip(prices).map(|(o, p)| (p - o.mid).abs()).collect()))
}

fn logistic(z: f64, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) / (1.0 + (-z).exp())
}

fn logit(p: f64, (lo, hi): (f64, f64)) -> f64 {
    let u = ((p - lo) / (hi - lo)).clamp(1e-9, 1.0 - 1e-9);
    (u / (1.0 - u)).ln()
}

/// Maps between bounded parameters and unconstrained coordinates.
#[derive(Debug, Clone, Copy)]
struct Transform {
    model: ModelKind,
    bounds: Bounds,
}

impl Transform {
    fn gamma_bounds(&self, alpha: f64) -> (f64, f64) {
        (self.bounds.gamma.0, self.bounds.gamma.1.min(alpha - GAMMA_GAP))
    }

    fn params(&self, z: &[f64]) -> ModelParams {
        let b = &self.bounds;
        match self.model {
            ModelKind::BlackScholes => ModelParams::bs(logistic(z[0], b.sigma)),
            ModelKind::LevyStable => ModelParams { alpha: logistic(z[0], b.alpha), gamma: 1.0, sigma: logistic(z[1], b.sigma) },
            ModelKind::DoubleFractional(_) => {
                let alpha = logistic(z[0], b.alpha);
                ModelParams { alpha, gamma: logistic(z[1], self.gamma_bounds(alpha)), sigma: logistic(z[2], b.sigma) }
            }
        }
    }

    fn coords(&self, p: &ModelParams) -> Vec<f64> {
        let b = &self.bounds;
        match self.model {
            ModelKind::BlackScholes => vec![logit(p.sigma, b.sigma)],
            ModelKind::LevyStable => vec![logit(p.alpha, b.alpha), logit(p.sigma, b.sigma)],
            ModelKind::DoubleFractional(_) => {
                vec![logit(p.alpha, b.alpha), logit(p.gamma, self.gamma_bounds(p.alpha)), logit(p.sigma, b.sigma)]
            }
        }
    }

    fn unit_coords(&self, u: &[f64]) -> Vec<f64> {
        u.iter().map(|&v| (v / (1.0 - v)).ln()).collect()
    }
}

/// Radical inverse of `i` in base `b`.
fn halton(mut i: u64, b: u64) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

fn starts(dim: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let offset = ChaCha8Rng::seed_from_u64(seed).gen_range(0..1024u64);
    let bases = [2u64, 3, 5];
    (0..n as u64).map(|i| (0..dim).map(|d| halton(offset + i + 1, bases[d])).collect()).collect()
}

/// Best-of-restarts fit of `model` to one day.
pub fn fit_day(snapshot: &MarketSnapshot, model: ModelKind, cfg: &CalibrationConfig) -> Result<FitResult> {
    let seeds = match model {
        ModelKind::DoubleFractional(_) => vec![fit_day_seeded(snapshot, ModelKind::LevyStable, cfg, &[])?.params],
        _ => Vec::new(),
    };
    fit_day_seeded(snapshot, model, cfg, &seeds)
}

/// As [`fit_day`], with extra starting points tried alongside the sequence.
pub fn fit_day_seeded(snapshot: &MarketSnapshot, model: ModelKind, cfg: &CalibrationConfig, seeds: &[ModelParams]) -> Result<FitResult> {
    cfg.validate()?;
    let quotes = selected(snapshot, cfg.side_filter);
    if quotes.len() < MIN_QUOTES {
        return Err(Error::InsufficientQuotes { found: quotes.len(), needed: MIN_QUOTES });
    }
    let tr = Transform { model, bounds: cfg.bounds };
    let objective = |z: &[f64]| -> f64 {
        let p = tr.params(z);
        model_prices(model, &p, snapshot, &quotes)
            .map(|prices| sorted_sum(quotes.iter().zip(prices).map(|(o, v)| (v - o.mid).abs()).collect()))
            .unwrap_or(f64::INFINITY)
    };
    if quotes.iter().all(|o| o.mid == 0.0) {
        let b = &cfg.bounds;
        let params = ModelParams {
            alpha: if model.dim() > 1 { b.alpha.0 } else { 2.0 },
            gamma: if model.dim() > 2 { b.gamma.0 } else { 1.0 },
            sigma: b.sigma.0,
        };
        let ae = objective(&tr.coords(&params));
        return Ok(FitResult { date: Some(snapshot.date), model, params, ae, n_quotes: quotes.len(), converged: false, degenerate: true, evals: 1 });
    }

    let mut inits: Vec<Vec<f64>> = starts(model.dim(), cfg.restarts, cfg.seed).iter().map(|u| tr.unit_coords(u)).collect();
    inits.extend(seeds.iter().map(|p| tr.coords(p)));
    let coarse = SimplexOptions { step: 0.5, x_tol: 100.0 * cfg.simplex_tol, max_evals: cfg.max_evals / 2 };
    let runs = par::map(ExecMode::Parallel, &inits, |z0| minimize(objective, z0, coarse));
    let mut evals: usize = runs.iter().map(|m| m.evals).sum();
    let best = runs.into_iter().enumerate().min_by(|a, b| a.1.f.total_cmp(&b.1.f).then(a.0.cmp(&b.0))).map(|(_, m)| m).expect("at least one start");
    let fine = SimplexOptions { step: 0.05, x_tol: cfg.simplex_tol, max_evals: cfg.max_evals };
    let polished = minimize(objective, &best.x, fine);
    evals += polished.evals;
    let m = if polished.f <= best.f { polished } else { Minimum { converged: polished.converged, ..best } };
    if !m.f.is_finite() {
        return Err(Error::NonConvergence { what: "calibration", detail: format!("{} found no finite objective", model.label()) });
    }
    Ok(FitResult {
        date: Some(snapshot.date),
        model,
        params: tr.params(&m.x),
        ae: m.f,
        n_quotes: quotes.len(),
        converged: m.converged,
        degenerate: false,
        evals,
    })
}

/// All three fits of one day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayReport {
    pub date: chrono::NaiveDate,
    pub fits: Vec<FitResult>,
    pub failures: Vec<String>,
    /// ρ = AE_LS / AE_DF.
    pub rho: Option<f64>,
    /// Ω = γ/α of the double-fractional fit.
    pub omega: Option<f64>,
}

impl DayReport {
    pub fn fit(&self, model: ModelKind) -> Option<&FitResult> {
        self.fits.iter().find(|f| f.model == model)
    }
}

/// Mean and standard deviation of one model's daily fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub model: ModelKind,
    pub days: usize,
    pub mean: ModelParams,
    pub std: ModelParams,
    pub ae_mean: f64,
    pub ae_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub rows: Vec<SummaryRow>,
    pub rho: Option<(f64, f64)>,
    pub omega: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub days: Vec<DayReport>,
    pub summary: SeriesSummary,
}

/// Population mean and standard deviation; `None` for no data.
pub fn mean_std(v: &[f64]) -> Option<(f64, f64)> {
    if v.is_empty() {
        return None;
    }
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    Some((m, var.sqrt()))
}

fn fit_three(day: &MarketSnapshot, cfg: &CalibrationConfig) -> DayReport {
    let mut fits = Vec::new();
    let mut failures = Vec::new();
    let mut record = |r: Result<FitResult>, model: ModelKind, failures: &mut Vec<String>| match r {
        Ok(f) => {
            fits.push(f.clone());
            Some(f)
        }
        Err(e) => {
            failures.push(format!("{}: {e}", model.label()));
            None
        }
    };
    record(fit_day_seeded(day, ModelKind::BlackScholes, cfg, &[]), ModelKind::BlackScholes, &mut failures);
    let ls = record(fit_day_seeded(day, ModelKind::LevyStable, cfg, &[]), ModelKind::LevyStable, &mut failures);
    let df_model = ModelKind::DoubleFractional(cfg.df_kind);
    let seeds: Vec<ModelParams> = ls.iter().map(|f| f.params).collect();
    let df = record(fit_day_seeded(day, df_model, cfg, &seeds), df_model, &mut failures);
    let rho = match (&ls, &df) {
        (Some(l), Some(d)) if d.ae > 0.0 => Some(l.ae / d.ae),
        _ => None,
    };
    DayReport { date: day.date, fits, failures, rho, omega: df.map(|d| d.params.omega()) }
}

/// Fits every day with all three models; failures are recorded per day.
pub fn fit_series(days: &[MarketSnapshot], cfg: &CalibrationConfig) -> Result<SeriesReport> {
    cfg.validate()?;
    if days.is_empty() {
        return Err(Error::Domain("fit_series needs at least one day".into()));
    }
    let reports = par::map(ExecMode::Parallel, days, |d| fit_three(d, cfg));
    let models = [ModelKind::BlackScholes, ModelKind::LevyStable, ModelKind::DoubleFractional(cfg.df_kind)];
    let mut rows = Vec::new();
    for model in models {
        let fits: Vec<&FitResult> = reports.iter().filter_map(|r| r.fit(model)).collect();
        let col = |f: fn(&FitResult) -> f64| mean_std(&fits.iter().map(|x| f(x)).collect::<Vec<_>>());
        if let (Some(a), Some(g), Some(s), Some(ae)) = (col(|f| f.params.alpha), col(|f| f.params.gamma), col(|f| f.params.sigma), col(|f| f.ae)) {
            rows.push(SummaryRow {
                model,
                days: fits.len(),
                mean: ModelParams { alpha: a.0, gamma: g.0, sigma: s.0 },
                std: ModelParams { alpha: a.1, gamma: g.1, sigma: s.1 },
                ae_mean: ae.0,
                ae_std: ae.1,
            });
        }
    }
    let rho = mean_std(&reports.iter().filter_map(|r| r.rho).collect::<Vec<_>>());
    let omega = mean_std(&reports.iter().filter_map(|r| r.omega).collect::<Vec<_>>());
    Ok(SeriesReport { days: reports, summary: SeriesSummary { rows, rho, omega } })
}
