//! Risk-neutral drift. Under g(·, τ) the exponential moment is
//!   ⟨e^ξ⟩_τ = Γ(κ) E_{γ,κ}(c τ^γ),  c = σ^α |sec(πα/2)|,
//! the Fourier image evaluated at p = −i. The drift μ(τ) = −ln⟨e^ξ⟩_τ / τ
//! makes e^{τμ + ξ} a martingale; at γ = 1 it is σ^α sec(πα/2) for every τ.

use super::kernel::kernel_expectation;
use super::DiffusionSpec;
use crate::error::{Error, Result};
use crate::quad::QuadConfig;
use crate::specfun::gamma::gamma;
use crate::specfun::mittag_leffler;
use num_complex::Complex64;

/// Drift μ with a flag for the formally extended γ > 1 case.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EsscherDrift {
    pub mu: f64,
    pub formal: bool,
}

/// ⟨e^ξ⟩ under g(·, τ).
pub fn exponential_moment(spec: &DiffusionSpec, tau: f64) -> Result<f64> {
    spec.validate()?;
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("tau must be positive, got {tau}")));
    }
    let z = spec.rate() * tau.powf(spec.gamma);
    if spec.gamma == 1.0 {
        return Ok(z.exp());
    }
    let e = mittag_leffler(spec.gamma, spec.kappa(), Complex64::new(z, 0.0))?;
    Ok(gamma(spec.kappa()) * e.re)
}

/// Drift at horizon τ. For γ < 1 the closed form is checked against the
/// kernel expectation ∫ K(1, u) e^{c τ^γ u} du and a deviation above 1e-4
/// relative is an error. For γ > 1 the same formula is used and flagged.
pub fn esscher_drift_at(spec: &DiffusionSpec, tau: f64) -> Result<EsscherDrift> {
    let m = exponential_moment(spec, tau)?;
    if spec.gamma == 1.0 {
        return Ok(EsscherDrift { mu: spec.mu1(), formal: false });
    }
    if spec.gamma < 1.0 {
        let tilt = spec.rate() * tau.powf(spec.gamma);
        let k = kernel_expectation(spec.kind, spec.gamma, tilt, |_| Ok(1.0), QuadConfig::new(1e-14, 1e-11))?;
        let dev = (k / m - 1.0).abs();
        if !(dev <= 1e-4) {
            return Err(Error::Martingale(dev));
        }
    }
    Ok(EsscherDrift { mu: -m.ln() / tau, formal: spec.gamma > 1.0 })
}

/// Drift at τ = 1.
pub fn esscher_drift(spec: &DiffusionSpec) -> Result<EsscherDrift> {
    esscher_drift_at(spec, 1.0)
}
