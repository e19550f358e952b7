//! Variance-minimizing hedge ratios for a short European option held
//! against φ units of stock over a single period [0, τ].
//!
//! With terminal spot S_T, payoff P and ΔS = S_T − S₀, the risk of the
//! hedged position is
//!   ℛ(φ) = Var(P − φ ΔS) = Var P − 2φ Cov(P, ΔS) + φ² Var ΔS,
//! whose stationary point is φ* = Cov(P, ΔS) / Var(ΔS). The option premium
//! and S₀ are constants and drop out of the variance.
//!
//! All expectations are taken under the terminal law S_T = A e^{s x}, x ~ h,
//! with the same density table and kink split as the pricer.

use crate::error::{Error, Result};
use crate::green::{DerivativeKind, DiffusionSpec};
use crate::pricing::{check_inputs, DfPricer, OptionSide};

pub use crate::pricing::bs_delta;

/// Terminal-law model for hedging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HedgeModel {
    Df(DiffusionSpec),
    /// Lognormal with Black-Scholes volatility, run through the α = 2 density.
    Bs { vol: f64 },
}

impl HedgeModel {
    pub fn spec(&self) -> Result<DiffusionSpec> {
        match *self {
            HedgeModel::Df(spec) => {
                spec.validate()?;
                Ok(spec)
            }
            HedgeModel::Bs { vol } => DiffusionSpec::new(2.0, 1.0, DerivativeKind::Caputo, vol / std::f64::consts::SQRT_2),
        }
    }
}

/// One hedging problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HedgeInput {
    pub model: HedgeModel,
    pub side: OptionSide,
    pub s0: f64,
    pub k: f64,
    pub tau: f64,
    pub r: f64,
    pub q: f64,
}

impl HedgeInput {
    pub fn call(model: HedgeModel, s0: f64, k: f64, tau: f64, r: f64, q: f64) -> Self {
        Self { model, side: OptionSide::Call, s0, k, tau, r, q }
    }
}

/// First and second moments of (ΔS, P) under the terminal law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HedgeMoments {
    pub mean_move: f64,
    pub var_move: f64,
    pub mean_payoff: f64,
    pub var_payoff: f64,
    pub cov: f64,
}

impl HedgeMoments {
    pub fn optimal_phi(&self) -> f64 {
        self.cov / self.var_move
    }

    /// ℛ(φ) from the moments.
    pub fn risk(&self, phi: f64) -> f64 {
        (self.var_payoff - 2.0 * phi * self.cov + phi * phi * self.var_move).max(0.0)
    }
}

/// Terminal law for fixed (model, S₀, τ, r, q); strikes vary per call.
#[derive(Debug, Clone)]
pub struct Hedger {
    pricer: DfPricer,
    s0: f64,
    tau: f64,
    /// S_T = a e^{s x}.
    a: f64,
    s: f64,
    /// Numerical total mass, used to normalize every expectation.
    mass: f64,
}

impl Hedger {
    pub fn new(model: HedgeModel, s0: f64, tau: f64, r: f64, q: f64) -> Result<Self> {
        check_inputs(s0, s0, tau)?;
        let spec = model.spec()?;
        let pricer = DfPricer::new(&spec, &[tau])?;
        let (slice, moment, _) = pricer.maturity(tau)?;
        let a = s0 * ((r - q) * tau).exp() / moment;
        let s = slice.scale();
        let mass = slice.total(0) + pricer.table().left_mass(pricer.table().range().0);
        Ok(Self { pricer, s0, tau, a, s, mass })
    }

    pub fn from_input(inp: &HedgeInput) -> Result<Self> {
        Self::new(inp.model, inp.s0, inp.tau, inp.r, inp.q)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    fn spot(&self, x: f64) -> f64 {
        self.a * (self.s * x).exp()
    }

    /// ⟨f(S_T)⟩ with the split at the payoff kink x_K.
    fn expect<F: Fn(f64) -> f64>(&self, k: f64, f: F) -> f64 {
        let table = self.pricer.table();
        let (lo, hi) = table.range();
        let xk = ((k / self.a).ln() / self.s).clamp(lo, hi);
        let g = |x: f64| f(self.spot(x));
        // Beyond the grid start S_T is below a e^{s x_lo}, numerically zero.
        let far = table.left_mass(lo) * f(0.0);
        (table.integrate(lo, xk, g) + table.integrate(xk, hi, g) + far) / self.mass
    }

    fn payoff(side: OptionSide, k: f64, st: f64) -> f64 {
        match side {
            OptionSide::Call => (st - k).max(0.0),
            OptionSide::Put => (k - st).max(0.0),
        }
    }

    /// Moments of (ΔS, P); central moments are integrated directly.
    pub fn moments(&self, k: f64, side: OptionSide) -> Result<HedgeMoments> {
        check_inputs(self.s0, k, self.tau)?;
        let s0 = self.s0;
        let pay = |st: f64| Self::payoff(side, k, st);
        let mean_move = self.expect(k, |st| st - s0);
        let mean_payoff = self.expect(k, pay);
        let var_move = self.expect(k, |st| (st - s0 - mean_move).powi(2));
        let var_payoff = self.expect(k, |st| (pay(st) - mean_payoff).powi(2));
        let cov = self.expect(k, |st| (st - s0 - mean_move) * (pay(st) - mean_payoff));
        let scale = (s0 + mean_move).powi(2);
        if !(var_move > 1e-14 * scale) {
            return Err(Error::VanishingVariance);
        }
        Ok(HedgeMoments { mean_move, var_move, mean_payoff, var_payoff, cov })
    }

    /// ℛ(φ) = ⟨(P − ⟨P⟩ − φ(ΔS − ⟨ΔS⟩))²⟩ by quadrature of the squared deviation.
    pub fn portfolio_risk(&self, phi: f64, k: f64, side: OptionSide) -> Result<f64> {
        check_inputs(self.s0, k, self.tau)?;
        if !phi.is_finite() {
            return Err(Error::Domain(format!("hedge ratio must be finite, got {phi}")));
        }
        let s0 = self.s0;
        let pay = |st: f64| Self::payoff(side, k, st);
        let mean_move = self.expect(k, |st| st - s0);
        let mean_payoff = self.expect(k, pay);
        let risk = self.expect(k, |st| (pay(st) - mean_payoff - phi * (st - s0 - mean_move)).powi(2));
        Ok(risk.max(0.0))
    }

    pub fn optimal_phi(&self, k: f64, side: OptionSide) -> Result<f64> {
        Ok(self.moments(k, side)?.optimal_phi())
    }

    /// Literal normalization ⟨(S₀ − S_T) P⟩ / Var(ΔS); not the stationary point
    /// of ℛ in general.
    pub fn literal_phi(&self, k: f64, side: OptionSide) -> Result<f64> {
        let m = self.moments(k, side)?;
        let s0 = self.s0;
        let raw = self.expect(k, |st| (s0 - st) * Self::payoff(side, k, st));
        Ok(raw / m.var_move)
    }
}

pub fn portfolio_risk(phi: f64, inp: &HedgeInput) -> Result<f64> {
    Hedger::from_input(inp)?.portfolio_risk(phi, inp.k, inp.side)
}

pub fn optimal_phi(inp: &HedgeInput) -> Result<f64> {
    Hedger::from_input(inp)?.optimal_phi(inp.k, inp.side)
}

pub fn literal_phi(inp: &HedgeInput) -> Result<f64> {
    Hedger::from_input(inp)?.literal_phi(inp.k, inp.side)
}
