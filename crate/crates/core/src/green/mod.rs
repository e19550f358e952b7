//! Green function g(ξ, τ) of the double-fractional diffusion equation
//! (∂^γ_τ + μ D^α_ξ) g = 0 with a fully asymmetric (β = −1) space operator.
//!
//! Three independent routes: the Mellin-Barnes contour integral (all γ),
//! Fourier inversion of the stable characteristic function (γ = 1) and
//! the smearing-kernel composition over pseudo-time (γ < 1). The
//! risk-neutral drift that makes e^ξ a martingale lives here as well.

mod drift;
mod kernel;
mod mellin;

pub use drift::{esscher_drift, esscher_drift_at, exponential_moment, EsscherDrift};
pub use kernel::{
    green_via_kernel, kernel_stretch_exponent, ln_smearing_kernel_caputo, ln_smearing_kernel_rf, rf_small_l_slope_exact,
    rf_small_l_slope_stated, smearing_kernel, smearing_kernel_caputo, smearing_kernel_rf,
};
pub use mellin::{green_at_origin, green_mellin_barnes, MellinBarnes};

use crate::error::{Error, Result};
use crate::specfun::{stable_density, StableParams};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Time derivative of the model: Caputo (κ = 1) or Riesz-Feller (κ = γ).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeKind {
    #[default]
    Caputo,
    RieszFeller,
}

impl std::str::FromStr for DerivativeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "caputo" | "c" => Ok(Self::Caputo),
            "rf" | "riesz" | "riesz_feller" | "riesz-feller" => Ok(Self::RieszFeller),
            other => Err(Error::Domain(format!("unknown derivative kind `{other}`"))),
        }
    }
}

/// Double-fractional model: space order α, time order γ, derivative kind
/// and the volatility scale σ (per unit time^{γ/α}).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionSpec {
    pub alpha: f64,
    pub gamma: f64,
    pub kind: DerivativeKind,
    pub sigma: f64,
}

impl DiffusionSpec {
    pub fn new(alpha: f64, gamma: f64, kind: DerivativeKind, sigma: f64) -> Result<Self> {
        let s = Self { alpha, gamma, kind, sigma };
        s.validate()?;
        Ok(s)
    }

    /// Log-stable model (γ = 1).
    pub fn levy(alpha: f64, sigma: f64) -> Result<Self> {
        Self::new(alpha, 1.0, DerivativeKind::Caputo, sigma)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0 && self.alpha <= 2.0) {
            return Err(Error::Domain(format!("alpha must lie in (1, 2], got {}", self.alpha)));
        }
        if !(self.gamma > 0.0 && self.gamma < 2.0) {
            return Err(Error::Domain(format!("gamma must lie in (0, 2), got {}", self.gamma)));
        }
        if self.gamma > 1.0 && self.gamma >= self.alpha {
            return Err(Error::Domain(format!(
                "gamma = {} > 1 needs gamma < alpha = {} for a positive Green function",
                self.gamma, self.alpha
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Domain(format!("sigma must be positive, got {}", self.sigma)));
        }
        Ok(())
    }

    /// κ: 1 for Caputo, γ for Riesz-Feller.
    pub fn kappa(&self) -> f64 {
        match self.kind {
            DerivativeKind::Caputo => 1.0,
            DerivativeKind::RieszFeller => self.gamma,
        }
    }

    /// Diffusion scaling exponent Ω = γ/α.
    pub fn omega(&self) -> f64 {
        self.gamma / self.alpha
    }

    /// μ₁ = σ^α sec(πα/2), negative on (1, 2].
    pub fn mu1(&self) -> f64 {
        self.sigma.powf(self.alpha) / (0.5 * PI * self.alpha).cos()
    }

    /// Positive rate c = −μ₁ = σ^α |sec(πα/2)|.
    pub fn rate(&self) -> f64 {
        -self.mu1()
    }

    /// Spatial scale (c τ^γ)^{1/α}: g(ξ, τ) = h(ξ / scale) / scale.
    pub fn scale(&self, tau: f64) -> f64 {
        (self.rate() * tau.powf(self.gamma)).powf(1.0 / self.alpha)
    }
}

/// Vertical contour Re s = c, truncated at |Im s| = t_max, with at least
/// `n_nodes` Gauss-Legendre nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourConfig {
    pub c: f64,
    pub t_max: f64,
    pub n_nodes: usize,
}

impl ContourConfig {
    /// Abscissa min(α, 1)/2, t_max = 200, 256 nodes.
    pub fn for_spec(spec: &DiffusionSpec) -> Self {
        Self { c: spec.alpha.min(1.0) / 2.0, t_max: 200.0, n_nodes: 256 }
    }

    /// As `for_spec`, with t_max raised so the e^{−π(1−Ω)t/2} envelope of the
    /// integrand reaches 1e-16 before truncation (capped at 20000).
    pub fn adaptive(spec: &DiffusionSpec) -> Self {
        let decay = 0.5 * PI * (1.0 - spec.omega()).max(1e-6);
        let need = 37.0 / decay + 20.0;
        Self { t_max: need.clamp(200.0, 20_000.0), ..Self::for_spec(spec) }
    }

    pub fn validate(&self, spec: &DiffusionSpec) -> Result<()> {
        if !(self.c > 0.0 && self.c < spec.alpha.min(1.0)) {
            return Err(Error::Domain(format!("contour abscissa must lie in (0, min(alpha, 1)), got {}", self.c)));
        }
        if !(self.t_max > 0.0) || self.n_nodes < 64 {
            return Err(Error::Domain("contour needs t_max > 0 and n_nodes >= 64".into()));
        }
        Ok(())
    }
}

/// γ = 1 Green function by Fourier inversion: the β = −1 stable density
/// with scale σ τ^{1/α}.
pub fn green_fourier(spec: &DiffusionSpec, xi: f64, tau: f64) -> Result<f64> {
    spec.validate()?;
    if spec.gamma != 1.0 {
        return Err(Error::Domain(format!("green_fourier needs gamma = 1, got {}", spec.gamma)));
    }
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("tau must be positive, got {tau}")));
    }
    stable_density(&space_law(spec, tau)?, xi)
}

/// Stable law of the space-fractional part at (pseudo-)time t.
pub(crate) fn space_law(spec: &DiffusionSpec, t: f64) -> Result<StableParams> {
    StableParams::new(spec.alpha, -1.0, 0.0, spec.sigma * t.powf(1.0 / spec.alpha))
}

/// g(ξ, τ) through the scaling law τ^{−Ω} g(ξ τ^{−Ω}, 1).
pub fn diffusion_scaling(spec: &DiffusionSpec, xi: f64, tau: f64) -> Result<f64> {
    spec.validate()?;
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("tau must be positive, got {tau}")));
    }
    let f = tau.powf(-spec.omega());
    let mb = MellinBarnes::new(spec, &ContourConfig::for_spec(spec))?;
    Ok(f * mb.density(xi * f, 1.0)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(DiffusionSpec::new(1.0, 0.9, DerivativeKind::Caputo, 0.2).is_err());
        assert!(DiffusionSpec::new(1.6, 1.7, DerivativeKind::Caputo, 0.2).is_err());
        assert!(DiffusionSpec::new(1.6, 1.1, DerivativeKind::Caputo, -0.2).is_err());
        let s = DiffusionSpec::new(1.6, 1.1, DerivativeKind::RieszFeller, 0.2).unwrap();
        assert_eq!(s.kappa(), 1.1);
        assert!((s.omega() - 1.1 / 1.6).abs() < 1e-15);
    }

    #[test]
    fn gaussian_rate_is_sigma_squared() {
        let s = DiffusionSpec::levy(2.0, 0.3).unwrap();
        assert!((s.mu1() + 0.09).abs() < 1e-15);
        assert!((s.scale(4.0) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn contour_config_defaults() {
        let s = DiffusionSpec::levy(1.5, 1.0).unwrap();
        let c = ContourConfig::for_spec(&s);
        assert_eq!(c.c, 0.5);
        assert!(c.validate(&s).is_ok());
        assert!(ContourConfig { c: 1.2, ..c }.validate(&s).is_err());
        assert!(ContourConfig { n_nodes: 10, ..c }.validate(&s).is_err());
    }

    #[test]
    fn fourier_route_examples() {
        let g = DiffusionSpec::levy(2.0, 1.0).unwrap();
        assert!((green_fourier(&g, 0.0, 1.0).unwrap() - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-12);
        let s = DiffusionSpec::levy(1.5, 1.0).unwrap();
        let direct = stable_density(&StableParams::new(1.5, -1.0, 0.0, 2f64.powf(2.0 / 3.0)).unwrap(), 1.0).unwrap();
        assert!((green_fourier(&s, 1.0, 2.0).unwrap() - direct).abs() < 1e-15);
        let sub = DiffusionSpec::new(1.5, 0.9, DerivativeKind::Caputo, 1.0).unwrap();
        assert!(green_fourier(&sub, 1.0, 1.0).is_err());
    }
}
