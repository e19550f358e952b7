//! Black-Scholes closed forms.

use super::{check_inputs, OptionSide, PriceResult};
use crate::error::{Error, Result};
use statrs::function::erf::erfc;
use std::f64::consts::SQRT_2;

/// Standard normal distribution function.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

fn d1_d2(s: f64, k: f64, tau: f64, r: f64, q: f64, vol: f64) -> (f64, f64) {
    let sd = vol * tau.sqrt();
    let d1 = ((s / k).ln() + (r - q) * tau) / sd + 0.5 * sd;
    (d1, d1 - sd)
}

/// Lognormal European price. σ√τ = 0 returns the discounted forward intrinsic value.
pub fn bs_price(s: f64, k: f64, tau: f64, r: f64, q: f64, vol: f64, side: OptionSide) -> Result<PriceResult> {
    check_inputs(s, k, tau)?;
    if !(vol >= 0.0 && vol.is_finite()) {
        return Err(Error::Domain(format!("volatility must be nonnegative, got {vol}")));
    }
    let (fwd_s, fwd_k) = (s * (-q * tau).exp(), k * (-r * tau).exp());
    let value = if vol * tau.sqrt() == 0.0 {
        match side {
            OptionSide::Call => (fwd_s - fwd_k).max(0.0),
            OptionSide::Put => (fwd_k - fwd_s).max(0.0),
        }
    } else {
        let (d1, d2) = d1_d2(s, k, tau, r, q, vol);
        match side {
            OptionSide::Call => fwd_s * norm_cdf(d1) - fwd_k * norm_cdf(d2),
            OptionSide::Put => fwd_k * norm_cdf(-d2) - fwd_s * norm_cdf(-d1),
        }
    };
    Ok(PriceResult {
        value: value.max(0.0),
        quadrature_error: 0.0,
        drift_mu: -0.5 * vol * vol,
        martingale_ok: true,
        formal: false,
    })
}

/// ∂C/∂S for a call under Black-Scholes.
pub fn bs_delta(s: f64, k: f64, tau: f64, r: f64, q: f64, vol: f64) -> Result<f64> {
    check_inputs(s, k, tau)?;
    if !(vol > 0.0) {
        return Err(Error::Domain(format!("volatility must be positive, got {vol}")));
    }
    let (d1, _) = d1_d2(s, k, tau, r, q, vol);
    Ok((-q * tau).exp() * norm_cdf(d1))
}

/// Black-Scholes volatility reproducing `price`, by bisection on [1e-6, 5].
pub fn bs_implied_vol(price: f64, s: f64, k: f64, tau: f64, r: f64, q: f64, side: OptionSide) -> Result<f64> {
    let (mut lo, mut hi) = (1e-6, 5.0);
    let f = |v: f64| bs_price(s, k, tau, r, q, v, side).map(|p| p.value - price);
    if f(lo)? > 0.0 || f(hi)? < 0.0 {
        return Err(Error::Domain(format!("price {price} outside the Black-Scholes range")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits() {
        let c = bs_price(100.0, 90.0, 1e-12, 0.0, 0.0, 0.2, OptionSide::Call).unwrap().value;
        assert!((c - 10.0).abs() < 1e-9);
        let c = bs_price(100.0, 90.0, 2.0, 0.05, 0.01, 0.0, OptionSide::Call).unwrap().value;
        let fwd = 100.0 * (-0.02f64).exp() - 90.0 * (-0.1f64).exp();
        assert!((c - fwd).abs() < 1e-12);
    }

    #[test]
    fn parity_and_delta() {
        let (s, k, t, r, q, v) = (100.0, 105.0, 0.7, 0.03, 0.01, 0.25);
        let c = bs_price(s, k, t, r, q, v, OptionSide::Call).unwrap().value;
        let p = bs_price(s, k, t, r, q, v, OptionSide::Put).unwrap().value;
        assert!((c - p - s * (-q * t).exp() + k * (-r * t).exp()).abs() < 1e-12);
        let h = 1e-4;
        let up = bs_price(s + h, k, t, r, q, v, OptionSide::Call).unwrap().value;
        let dn = bs_price(s - h, k, t, r, q, v, OptionSide::Call).unwrap().value;
        assert!(((up - dn) / (2.0 * h) - bs_delta(s, k, t, r, q, v).unwrap()).abs() < 1e-7);
    }

    #[test]
    fn implied_vol_inverts() {
        let p = bs_price(100.0, 95.0, 0.5, 0.01, 0.0, 0.31, OptionSide::Put).unwrap().value;
        let v = bs_implied_vol(p, 100.0, 95.0, 0.5, 0.01, 0.0, OptionSide::Put).unwrap();
        assert!((v - 0.31).abs() < 1e-10);
    }
}
