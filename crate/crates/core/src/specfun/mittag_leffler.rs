//! Two-parameter Mittag-Leffler function E_{a,b}(z).
//!
//! Small |z| uses the power series; large |z| outside the exponential
//! sector uses the Mellin-Barnes integral
//! E_{a,b}(z) = (1/2πi) ∫ Γ(s)Γ(1−s)/Γ(b−as) (−z)^{−s} ds, Re s = 1/2.
//! Inside the sector the series is retried with a cancellation check.

use super::gamma::{ln_gamma, ln_rgamma_complex, ln_sin_pi, rgamma};
use super::SeriesControl;
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadConfig};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Which method produced a Mittag-Leffler value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlMethod {
    Series,
    MellinBarnes,
}

/// E_{a,b}(z) with the default control.
pub fn mittag_leffler(a: f64, b: f64, z: Complex64) -> Result<Complex64> {
    mittag_leffler_with(a, b, z, &SeriesControl::default()).map(|r| r.0)
}

/// E_{a,b}(z), also reporting the method used.
pub fn mittag_leffler_with(a: f64, b: f64, z: Complex64, ctl: &SeriesControl) -> Result<(Complex64, MlMethod)> {
    if !(a > 0.0) || !b.is_finite() {
        return Err(Error::Domain(format!("Mittag-Leffler needs a > 0, got a={a}, b={b}")));
    }
    let mut tried_series = false;
    if z.norm() <= ctl.switch_radius {
        tried_series = true;
        if let Some(v) = ml_series(a, b, z, ctl) {
            return Ok((v, MlMethod::Series));
        }
    }
    if mb_decay_rate(a, z) > 0.05 {
        return ml_mellin_barnes(a, b, z, ctl).map(|v| (v, MlMethod::MellinBarnes));
    }
    if !tried_series {
        if let Some(v) = ml_series(a, b, z, ctl) {
            return Ok((v, MlMethod::Series));
        }
    }
    Err(Error::NonConvergence {
        what: "mittag_leffler",
        detail: format!("a={a}, b={b}, z={z}: series cancels and the contour integral diverges"),
    })
}

/// Direct power series; `None` when the budget runs out or cancellation
/// eats the requested accuracy.
pub fn ml_series(a: f64, b: f64, z: Complex64, ctl: &SeriesControl) -> Option<Complex64> {
    if z == Complex64::new(0.0, 0.0) {
        return Some(Complex64::new(rgamma(b), 0.0));
    }
    let lnz = z.ln();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    let mut max_term: f64 = 0.0;
    let mut prev = f64::INFINITY;
    for n in 0..ctl.max_terms {
        let arg = a * n as f64 + b;
        let term = if arg > 0.0 {
            (lnz * n as f64 - ln_gamma(arg)).exp()
        } else {
            (lnz * n as f64).exp() * rgamma(arg)
        };
        // Kahan-compensated accumulation
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        let m = term.norm();
        max_term = max_term.max(m);
        let scale = sum.norm().max(1.0);
        let decreasing = m < prev;
        prev = m;
        if n > 2 && decreasing && m <= 0.5 * ctl.abs_tol * scale && arg > 1.0 && z.norm() < (a * n as f64).powf(a) * 0.5 {
            let noise = max_term * f64::EPSILON * (n as f64).sqrt();
            if noise > 10.0 * ctl.abs_tol * scale {
                return None;
            }
            return Some(sum);
        }
    }
    None
}

/// Exponential decay rate of the Mellin-Barnes integrand in |Im s|.
fn mb_decay_rate(a: f64, z: Complex64) -> f64 {
    if a >= 2.0 {
        return -1.0;
    }
    let arg = (-z).arg().abs();
    PI * (1.0 - 0.5 * a) - arg
}

fn ml_mellin_barnes(a: f64, b: f64, z: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    let c = 0.5;
    let ln_mz = (-z).ln();
    let rate = mb_decay_rate(a, z);
    let integrand = |s: Complex64| -> Complex64 {
        match ln_rgamma_complex(b - a * s) {
            Some(lrg) => (PI.ln() - ln_sin_pi(s) + lrg - s * ln_mz).exp(),
            None => Complex64::new(0.0, 0.0),
        }
    };
    // |integrand| ~ 2π e^{-rate t} (a t)^p |z|^{-c}
    let p = 0.5 - b + a * c;
    let mut t_end = 8.0;
    loop {
        let bound = 2.0 * PI * (-rate * t_end).exp() * (a * t_end).max(1.0).powf(p) * (-z).norm().powf(-c);
        if bound < 1e-18 || t_end > 1e5 {
            break;
        }
        t_end *= 1.25;
    }
    let width = (PI / ln_mz.re.abs().max(1.0)).min(1.0);
    let n = ((t_end / width).ceil() as usize).max(8);
    let breaks: Vec<f64> = (0..=n).map(|k| t_end * k as f64 / n as f64).collect();
    let cfg = QuadConfig { abs_tol: 0.1 * ctl.abs_tol, rel_tol: 1e-15, max_panels: 20 * n + 2000 };
    let q = integrate(
        |t: f64| integrand(Complex64::new(c, t)) + integrand(Complex64::new(c, -t)),
        &breaks,
        cfg,
    )?;
    Ok(q.value / (2.0 * PI))
}
