//! Wright M-function M_ν(z) and the one-sided stable density it encodes.
//!
//! The alternating series is used while its cancellation stays harmless.
//! Beyond that the Zolotarev-Kanter representation
//! M_ν(z) = z^{ν/(1−ν)} / ((1−ν)π) ∫₀^π A(φ) exp(−z^{1/(1−ν)} A(φ)) dφ,
//! A(φ) = sin(νφ)^{ν/(1−ν)} sin((1−ν)φ) / sin(φ)^{1/(1−ν)},
//! is integrated in log form, which also gives ln M far into the tail.

use super::gamma::{ln_abs_rgamma, ln_gamma, rgamma};
use super::SeriesControl;
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadConfig};
use std::f64::consts::PI;

fn check_nu(nu: f64) -> Result<()> {
    if nu > 0.0 && nu < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("Wright M needs 0 < nu < 1, got {nu}")))
    }
}

/// M_ν(z) for z ≥ 0.
pub fn wright_m(nu: f64, z: f64) -> Result<f64> {
    wright_m_with(nu, z, &SeriesControl::default())
}

pub fn wright_m_with(nu: f64, z: f64, ctl: &SeriesControl) -> Result<f64> {
    check_nu(nu)?;
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("Wright M needs z >= 0, got {z}")));
    }
    if z == 0.0 {
        return Ok(rgamma(1.0 - nu));
    }
    if let Some(v) = m_series(nu, z, ctl) {
        return Ok(v.max(0.0));
    }
    Ok(ln_m_kanter(nu, z)?.exp())
}

/// ln M_ν(z), accurate where M itself underflows.
pub fn ln_wright_m(nu: f64, z: f64) -> Result<f64> {
    check_nu(nu)?;
    if z == 0.0 {
        return Ok(rgamma(1.0 - nu).ln());
    }
    if let Some(v) = m_series(nu, z, &SeriesControl::default()) {
        if v > 1e-250 {
            return Ok(v.ln());
        }
    }
    ln_m_kanter(nu, z)
}

/// Alternating series Σ (−z)ⁿ / (n! Γ(1−ν−νn)); `None` if cancellation
/// would cost more than a few digits or the budget runs out.
pub fn m_series(nu: f64, z: f64, ctl: &SeriesControl) -> Option<f64> {
    let lnz = z.ln();
    let mut sum = 0.0;
    let mut max_term: f64 = 0.0;
    for n in 0..ctl.max_terms {
        let x = 1.0 - nu - nu * n as f64;
        let base = n as f64 * lnz - ln_gamma(n as f64 + 1.0);
        // Envelope of |term| without the sin(πx) factor, which can be
        // accidentally tiny near the poles of Γ(x).
        let envelope = if x > 0.0 { base - ln_gamma(x) } else { base + ln_gamma(1.0 - x) - PI.ln() };
        if x <= 0.0 && x != x.round() {
            let (lr, sr) = ln_abs_rgamma(x);
            let sign = if n % 2 == 1 { -sr } else { sr };
            sum += sign * (base + lr).exp();
        } else if x > 0.0 {
            let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
            sum += sign * (base - ln_gamma(x)).exp();
        }
        let env = envelope.exp();
        max_term = max_term.max(env);
        let past_peak = (n as f64) > (z.powf(1.0 / (1.0 - nu)) + 2.0);
        if past_peak && env <= ctl.abs_tol * 1e-3 * sum.abs().max(1e-300) {
            if max_term * f64::EPSILON * 64.0 > 1e-12 * sum.abs() {
                return None;
            }
            return Some(sum);
        }
    }
    None
}

/// ln A(φ) written with ratios so no large logarithms cancel near φ = 0.
fn ln_kanter_a(nu: f64, phi: f64) -> f64 {
    let q = 1.0 / (1.0 - nu);
    if phi < 1e-7 {
        return nu * q * nu.ln() + (1.0 - nu).ln();
    }
    let snp = (nu * phi).sin();
    q * (snp / phi.sin()).ln() - (snp / ((1.0 - nu) * phi).sin()).ln()
}

pub fn ln_m_kanter(nu: f64, z: f64) -> Result<f64> {
    let q = 1.0 / (1.0 - nu);
    let ln_w = q * z.ln();
    let a0 = ln_kanter_a(nu, 0.0).exp();
    if ln_w > 700.0 {
        // ln M ≈ −w A₀ to leading order, far below anything representable.
        return Ok(-(ln_w + a0.ln()).exp());
    }
    let w = ln_w.exp();
    let f = |phi: f64| -> f64 {
        let la = ln_kanter_a(nu, phi);
        let a = la.exp();
        let e = la - w * (a - a0);
        if e < -745.0 {
            0.0
        } else {
            e.exp()
        }
    };
    let mut breaks = vec![0.0];
    for k in (1..=40).rev() {
        breaks.push(PI * 0.5f64.powi(k));
    }
    for k in 2..=12 {
        breaks.push(PI * (1.0 - 0.5f64.powi(k)));
    }
    breaks.push(PI);
    // The exponent w(A − A0) carries round-off of order ε q w A0, which
    // sets the attainable relative accuracy for large w.
    let noise = 1e-15 * q * w * a0;
    let cfg = QuadConfig { abs_tol: 1e-15 * a0, rel_tol: 1e-10f64.max(noise), max_panels: 4000 };
    let qv = integrate(f, &breaks, cfg)?;
    if !(qv.value > 0.0) {
        return Err(Error::NonConvergence { what: "wright_m", detail: format!("nu={nu}, z={z}") });
    }
    Ok(nu * q * z.ln() - ((1.0 - nu) * PI).ln() - w * a0 + qv.value.ln())
}

/// Density of the one-sided stable law with Laplace transform e^{−s^ν},
/// f(x) = ν x^{−ν−1} M_ν(x^{−ν}).
pub fn one_sided_stable_density(nu: f64, x: f64) -> Result<f64> {
    Ok(ln_one_sided_stable_density(nu, x)?.exp())
}

/// ln of [`one_sided_stable_density`]; −∞ at x = 0.
pub fn ln_one_sided_stable_density(nu: f64, x: f64) -> Result<f64> {
    check_nu(nu)?;
    if x < 0.0 {
        return Err(Error::Domain(format!("one-sided density needs x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let z = x.powf(-nu);
    Ok(nu.ln() - (nu + 1.0) * x.ln() + ln_wright_m(nu, z)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::graded_breaks;

    #[test]
    fn value_at_origin() {
        assert!((wright_m(0.5, 0.0).unwrap() - 1.0 / PI.sqrt()).abs() < 1e-15);
        assert!((wright_m(0.3, 0.0).unwrap() - rgamma(0.7)).abs() < 1e-15);
    }

    #[test]
    fn half_order_is_gaussian() {
        for &z in &[0.3f64, 1.0, 2.5, 6.0, 12.0, 25.0] {
            let exact = (-z * z / 4.0).exp() / PI.sqrt();
            let v = wright_m(0.5, z).unwrap();
            assert!((v - exact).abs() <= 1e-13 + 1e-10 * exact, "z={z}: {v} vs {exact}");
            let lv = ln_wright_m(0.5, z).unwrap();
            assert!((lv - exact.ln()).abs() < 1e-9);
        }
        assert!((ln_wright_m(0.5, 60.0).unwrap() - (-900.0 - PI.sqrt().ln())).abs() < 1e-8);
    }

    #[test]
    fn series_and_integral_overlap() {
        for &nu in &[0.2, 0.45, 0.6, 0.8, 0.95] {
            for &z in &[0.4, 0.9, 1.5] {
                if nu > 0.9 && z > 1.0 {
                    continue;
                }
                let s = m_series(nu, z, &SeriesControl::default()).unwrap();
                let k = ln_m_kanter(nu, z).unwrap().exp();
                assert!((s - k).abs() < 1e-10, "nu={nu} z={z}: {s} vs {k}");
            }
        }
    }

    #[test]
    fn is_a_probability_density() {
        for &nu in &[0.3, 0.6, 0.9] {
            let q = integrate(|u| wright_m(nu, u).unwrap(), &graded_breaks(0.0, 40.0, 6), QuadConfig::new(1e-12, 1e-12)).unwrap();
            assert!((q.value - 1.0).abs() < 1e-6, "nu={nu}: {}", q.value);
        }
    }

    #[test]
    fn first_moment() {
        let nu = 0.6;
        let q = integrate(|u| u * wright_m(nu, u).unwrap(), &graded_breaks(0.0, 40.0, 6), QuadConfig::new(1e-12, 1e-12)).unwrap();
        assert!((q.value - rgamma(1.0 + nu)).abs() < 1e-8);
    }

    #[test]
    fn levy_one_sided_density() {
        // Laplace transform e^{-sqrt(s)}: density x^{-3/2} e^{-1/(4x)} / (2 sqrt(pi))
        for &x in &[0.01f64, 0.2, 1.0, 7.0, 300.0] {
            let exact = x.powf(-1.5) * (-0.25 / x).exp() / (2.0 * PI.sqrt());
            let v = one_sided_stable_density(0.5, x).unwrap();
            assert!((v / exact - 1.0).abs() < 1e-9, "x={x}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(wright_m(1.0, 0.5).is_err());
        assert!(wright_m(0.5, -1.0).is_err());
    }
}
