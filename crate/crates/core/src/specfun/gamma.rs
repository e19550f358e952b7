//! Complex Gamma via a 15-term Lanczos sum (g = 607/128) with reflection,
//! plus the real reciprocal Gamma used by power series.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_8e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_6e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn is_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

fn ln_gamma_lanczos(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut sum = Complex64::new(LANCZOS[0], 0.0);
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (z + 0.5) * t.ln() - t + LN_SQRT_2PI + sum.ln()
}

/// ln sin(πz), stable for large |Im z|. Defined modulo 2πi.
pub fn ln_sin_pi(z: Complex64) -> Complex64 {
    if z.im.abs() < 1.0 {
        return (z * PI).sin().ln();
    }
    if z.im < 0.0 {
        return ln_sin_pi(z.conj()).conj();
    }
    // sin(πz) = (i/2) e^{-iπz} (1 - e^{2iπz}), |e^{2iπz}| < e^{-2π}
    let i = Complex64::i();
    let e2 = (i * 2.0 * PI * z).exp();
    Complex64::new(-std::f64::consts::LN_2, PI / 2.0) - i * PI * z + (1.0 - e2).ln()
}

/// ln Γ(z) on the principal sheet modulo 2πi.
pub fn ln_gamma_complex(z: Complex64) -> Result<Complex64> {
    if is_pole(z) {
        return Err(Error::GammaPole(z.re));
    }
    if z.re < 0.5 {
        Ok(PI.ln() - ln_sin_pi(z) - ln_gamma_lanczos(1.0 - z))
    } else {
        Ok(ln_gamma_lanczos(z))
    }
}

/// Γ(z) for complex z.
pub fn gamma_complex(z: Complex64) -> Result<Complex64> {
    Ok(ln_gamma_complex(z)?.exp())
}

/// ln(1/Γ(z)); `None` at the poles of Γ where 1/Γ vanishes.
pub fn ln_rgamma_complex(z: Complex64) -> Option<Complex64> {
    ln_gamma_complex(z).ok().map(|v| -v)
}

/// Real Γ(x) for x > 0 as ln.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Real Γ(x), with reflection for x < 0.5.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// 1/Γ(x) for real x, exactly 0 at the non-positive integers.
pub fn rgamma(x: f64) -> f64 {
    if x > 0.0 {
        if x > 100.0 {
            (-ln_gamma(x)).exp()
        } else {
            1.0 / gamma(x)
        }
    } else if x == x.round() {
        0.0
    } else {
        // Reflection: 1/Γ(x) = sin(πx) Γ(1-x) / π
        let (ln, sign) = ln_abs_rgamma(x);
        sign * ln.exp()
    }
}

/// (ln|1/Γ(x)|, sign of 1/Γ(x)) for real x that is not a pole.
pub fn ln_abs_rgamma(x: f64) -> (f64, f64) {
    if x > 0.0 {
        return (-ln_gamma(x), 1.0);
    }
    let s = sin_pi(x);
    ((s.abs()).ln() + ln_gamma(1.0 - x) - PI.ln(), s.signum())
}

/// sin(πx) with exact argument reduction.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round();
    if r.abs() == 1.0 || r == 0.0 {
        return 0.0;
    }
    (PI * r).sin()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Stirling series after shifting the argument up by 40 with the
    /// recurrence; independent of the Lanczos coefficients.
    fn stirling_oracle(z: Complex64) -> Complex64 {
        let shift = 40;
        let mut w = z;
        let mut ln_prod = Complex64::new(0.0, 0.0);
        for _ in 0..shift {
            ln_prod += w.ln();
            w += 1.0;
        }
        let b2k = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0];
        let mut series = Complex64::new(0.0, 0.0);
        let mut wp = w;
        let w2 = w * w;
        for (k, b) in b2k.iter().enumerate() {
            let k = (k + 1) as f64;
            series += b / (2.0 * k * (2.0 * k - 1.0) * wp);
            wp *= w2;
        }
        (w - 0.5) * w.ln() - w + LN_SQRT_2PI + series - ln_prod
    }

    #[test]
    fn classical_values() {
        assert!((gamma_complex(c(1.0, 0.0)).unwrap() - 1.0).norm() < 1e-14);
        assert!((gamma_complex(c(0.5, 0.0)).unwrap().re - PI.sqrt()).abs() < 1e-14);
        assert!((gamma_complex(c(5.0, 0.0)).unwrap().re - 24.0).abs() < 1e-12);
        assert!((gamma_complex(c(-0.5, 0.0)).unwrap().re + 2.0 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn matches_stirling_oracle_on_strip() {
        for &(re, im) in &[(0.3, 4.0), (0.5, 50.0), (-2.7, 13.0), (1.9, -120.0), (-0.4, 199.0), (3.3, 0.1)] {
            let z = c(re, im);
            let lanczos = gamma_complex(z).unwrap();
            let oracle = stirling_oracle(z).exp();
            let rel = (lanczos - oracle).norm() / oracle.norm();
            assert!(rel < 1e-12, "z={z} rel={rel:e}");
        }
    }

    #[test]
    fn poles_are_rejected() {
        assert!(matches!(gamma_complex(c(0.0, 0.0)), Err(Error::GammaPole(_))));
        assert!(matches!(gamma_complex(c(-3.0, 0.0)), Err(Error::GammaPole(_))));
        assert!(gamma_complex(c(-3.0, 1e-9)).is_ok());
    }

    #[test]
    fn ln_sin_pi_far_from_axis() {
        for &(re, im) in &[(0.3, 1.5), (-2.2, 3.0), (0.7, -2.5)] {
            let z = c(re, im);
            let direct = (z * PI).sin();
            assert!((ln_sin_pi(z).exp() - direct).norm() < 1e-12 * direct.norm());
        }
        // Stays finite where sin overflows.
        assert!(ln_sin_pi(c(0.25, 400.0)).re.is_finite());
    }

    #[test]
    fn reciprocal_gamma_zeros_and_signs() {
        assert_eq!(rgamma(0.0), 0.0);
        assert_eq!(rgamma(-4.0), 0.0);
        assert!((rgamma(-0.5) + 0.5 / PI.sqrt()).abs() < 1e-15);
        assert!((rgamma(-1.5) - 1.0 / (4.0 / 3.0 * PI.sqrt())).abs() < 1e-14);
    }
}
