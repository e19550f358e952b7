//! Smearing kernels over pseudo-time l and the composition route
//! g(ξ, τ) = ∫₀^∞ K(τ, l) g_α(ξ, l) dl for γ < 1.
//!
//! Caputo: K(τ, l) = τ^{−γ} M_γ(l / τ^γ).
//! Riesz-Feller, normalized and without the stray μ:
//!   K(τ, l) = Γ(γ) τ^{1−γ} l^{−1/γ} L_γ(τ l^{−1/γ}),
//! with L_γ the one-sided stable density of Laplace transform e^{−s^γ}.
//! Both satisfy K(τ, l) dl = K(1, u) du with u = l / τ^γ.

use super::{space_law, DerivativeKind, DiffusionSpec};
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadConfig};
use crate::specfun::gamma::{gamma, ln_gamma};
use crate::specfun::wright::{ln_one_sided_stable_density, ln_wright_m};
use crate::specfun::stable_density;
use std::f64::consts::PI;

fn check(gamma: f64, tau: f64, l: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Domain(format!("smearing kernels need 0 < gamma < 1, got {gamma}")));
    }
    if !(tau > 0.0) || !(l >= 0.0) {
        return Err(Error::Domain(format!("need tau > 0 and l >= 0, got tau={tau}, l={l}")));
    }
    Ok(())
}

/// ln of the Caputo kernel τ^{−γ} M_γ(l/τ^γ).
pub fn ln_smearing_kernel_caputo(gamma: f64, tau: f64, l: f64) -> Result<f64> {
    check(gamma, tau, l)?;
    Ok(-gamma * tau.ln() + ln_wright_m(gamma, l / tau.powf(gamma))?)
}

pub fn smearing_kernel_caputo(gamma: f64, tau: f64, l: f64) -> Result<f64> {
    Ok(ln_smearing_kernel_caputo(gamma, tau, l)?.exp())
}

/// ln of the normalized Riesz-Feller kernel; −∞ at l = 0.
pub fn ln_smearing_kernel_rf(gamma: f64, tau: f64, l: f64) -> Result<f64> {
    check(gamma, tau, l)?;
    if l == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let x = tau * l.powf(-1.0 / gamma);
    Ok(ln_gamma(gamma) + (1.0 - gamma) * tau.ln() - l.ln() / gamma + ln_one_sided_stable_density(gamma, x)?)
}

pub fn smearing_kernel_rf(gamma: f64, tau: f64, l: f64) -> Result<f64> {
    Ok(ln_smearing_kernel_rf(gamma, tau, l)?.exp())
}

pub fn smearing_kernel(kind: DerivativeKind, gamma: f64, tau: f64, l: f64) -> Result<f64> {
    match kind {
        DerivativeKind::Caputo => smearing_kernel_caputo(gamma, tau, l),
        DerivativeKind::RieszFeller => smearing_kernel_rf(gamma, tau, l),
    }
}

fn ln_kernel(kind: DerivativeKind, gamma: f64, u: f64) -> Result<f64> {
    match kind {
        DerivativeKind::Caputo => ln_smearing_kernel_caputo(gamma, 1.0, u),
        DerivativeKind::RieszFeller => ln_smearing_kernel_rf(gamma, 1.0, u),
    }
}

/// Small-l slope of the RF kernel in the commonly stated cos form,
/// Γ(γ)Γ(γ+1) sin(πγ) / (cos(πγ/2) τ^{2γ}).
pub fn rf_small_l_slope_stated(g: f64, tau: f64) -> f64 {
    gamma(g) * gamma(g + 1.0) * (PI * g).sin() / ((0.5 * PI * g).cos() * tau.powf(2.0 * g))
}

/// Small-l slope implied by M_γ(0) = 1/Γ(1 − γ):
/// Γ(γ)Γ(γ+1) sin(πγ) / (π τ^{2γ}).
pub fn rf_small_l_slope_exact(g: f64, tau: f64) -> f64 {
    gamma(g) * gamma(g + 1.0) * (PI * g).sin() / (PI * tau.powf(2.0 * g))
}

/// Exponent p of the stretched-exponential decay ln K ~ −B l^p.
pub fn kernel_stretch_exponent(gamma: f64) -> f64 {
    1.0 / (1.0 - gamma)
}

/// Mean and standard deviation of u under K(1, u).
fn moments(kind: DerivativeKind, g: f64) -> (f64, f64) {
    // E u^n = n!/Γ(1 + nγ) for M_γ; the RF kernel is Γ(1+γ) u M_γ(u).
    let m = |n: f64| ln_gamma(n + 1.0) - ln_gamma(1.0 + n * g);
    let (m1, m2) = match kind {
        DerivativeKind::Caputo => (m(1.0).exp(), m(2.0).exp()),
        DerivativeKind::RieszFeller => {
            let k = ln_gamma(1.0 + g);
            ((k + m(2.0)).exp(), (k + m(3.0)).exp())
        }
    };
    (m1, (m2 - m1 * m1).max(0.0).sqrt())
}

/// Panel breaks in u covering the mass of K(1, u) e^{tilt u}.
fn kernel_breaks(kind: DerivativeKind, gamma: f64, tilt: f64) -> Result<Vec<f64>> {
    let (mean, std) = moments(kind, gamma);
    let step = (0.5 * std).min(0.25 * mean).max(1e-6);
    let mut pts: Vec<f64> = (1..=30).rev().map(|k| step * 0.5f64.powi(k)).collect();
    pts.insert(0, 0.0);
    let mut best = f64::NEG_INFINITY;
    let mut u = step;
    loop {
        let v = ln_kernel(kind, gamma, u)? + tilt * u;
        best = best.max(v);
        pts.push(u);
        if u > mean && v < best - 46.0 {
            return Ok(pts);
        }
        if pts.len() > 20_000 {
            return Err(Error::NonConvergence { what: "kernel_breaks", detail: format!("gamma={gamma}, tilt={tilt}") });
        }
        u += step;
    }
}

/// ∫₀^∞ K(1, u) e^{tilt u} f(u) du.
pub(crate) fn kernel_expectation<F: FnMut(f64) -> Result<f64>>(
    kind: DerivativeKind,
    gamma: f64,
    tilt: f64,
    mut f: F,
    cfg: QuadConfig,
) -> Result<f64> {
    let breaks = kernel_breaks(kind, gamma, tilt)?;
    let mut failure = None;
    let q = integrate(
        |u: f64| match ln_kernel(kind, gamma, u).and_then(|lk| Ok((lk + tilt * u).exp() * f(u)?)) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        &breaks,
        QuadConfig { max_panels: cfg.max_panels.max(4 * breaks.len()), ..cfg },
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(q.value),
    }
}

/// Standardized position beyond which the space density uses its tail form.
const TAIL_CUT: f64 = 40.0;

/// Space-fractional density at pseudo-time t; far in the tails the leading
/// power law (heavy side) or zero (light side) replaces the inversion.
fn space_density(spec: &DiffusionSpec, xi: f64, t: f64) -> Result<f64> {
    let law = space_law(spec, t)?;
    let y = xi / law.scale;
    if y.abs() <= TAIL_CUT {
        return stable_density(&law, xi);
    }
    if y > 0.0 {
        return Ok(0.0);
    }
    let a = spec.alpha;
    let coef = 2.0 * gamma(1.0 + a) * (0.5 * PI * a).sin() / PI;
    Ok(coef * (-y).powf(-1.0 - a) / law.scale)
}

/// g(ξ, τ) for γ < 1 by integrating the space-fractional Green function
/// over pseudo-time against the smearing kernel.
pub fn green_via_kernel(spec: &DiffusionSpec, xi: f64, tau: f64) -> Result<f64> {
    spec.validate()?;
    if !(spec.gamma < 1.0) {
        return Err(Error::Domain(format!("kernel composition needs gamma < 1, got {}", spec.gamma)));
    }
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("tau must be positive, got {tau}")));
    }
    let tg = tau.powf(spec.gamma);
    kernel_expectation(spec.kind, spec.gamma, 0.0, |u| space_density(spec, xi, tg * u), QuadConfig::new(1e-11, 1e-9))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::StableParams;

    #[test]
    fn caputo_kernel_at_origin() {
        assert!((smearing_kernel_caputo(0.5, 1.0, 0.0).unwrap() - 1.0 / PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn kernels_are_normalized() {
        for kind in [DerivativeKind::Caputo, DerivativeKind::RieszFeller] {
            for &g in &[0.6, 0.8, 0.95] {
                let v = kernel_expectation(kind, g, 0.0, |_| Ok(1.0), QuadConfig::new(1e-12, 1e-12)).unwrap();
                assert!((v - 1.0).abs() < 1e-8, "{kind:?} gamma={g}: {v}");
            }
        }
    }

    #[test]
    fn rf_kernel_matches_wright_form() {
        // Γ(γ)τ^{1−γ} l^{−1/γ} L_γ(τ l^{−1/γ}) = Γ(1+γ) l τ^{−2γ} M_γ(l/τ^γ)
        for &(g, tau, l) in &[(0.6, 1.0, 0.3), (0.8, 2.0, 1.7), (0.7, 0.5, 0.05)] {
            let a = smearing_kernel_rf(g, tau, l).unwrap();
            let b = gamma(1.0 + g) * l * tau.powf(-2.0 * g) * crate::specfun::wright_m(g, l / tau.powf(g)).unwrap();
            assert!((a - b).abs() < 1e-10 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn bridge_to_stable_density() {
        // c^{-1/ν} L(x c^{-1/ν}) = (c ν / x^{ν+1}) M_ν(c / x^ν), ν = 1/2, c = 1;
        // L has Laplace transform e^{-s^{1/2}}: stable β = 1, scale cos(π/4)^2.
        let law = StableParams::new(0.5, 1.0, 0.0, 0.5).unwrap();
        for &x in &[0.5f64, 1.0, 2.0] {
            let lhs = stable_density(&law, x).unwrap();
            let rhs = 0.5 / x.powf(1.5) * crate::specfun::wright_m(0.5, x.powf(-0.5)).unwrap();
            assert!((lhs - rhs).abs() < 1e-6, "x={x}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn rejects_orders_outside_unit_interval() {
        assert!(smearing_kernel_rf(1.0, 1.0, 0.5).is_err());
        assert!(smearing_kernel_caputo(0.0, 1.0, 0.5).is_err());
    }
}
