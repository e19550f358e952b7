//! Mellin-Barnes evaluation of the standardized Green function.
//!
//! With x = ξ / (c τ^γ)^{1/α} the density is h(x)/scale, where for x > 0
//!   h(x) = Γ(κ)/(α π) x^{c−1} ∫₀^∞ Re[F₊(c + it) e^{it ln x}] dt,
//!   F₊(s) = Γ(1 − s) / Γ(κ − Ω s),
//! and for x < 0 the reflected integrand at |x| is
//!   F₋(s) = sin(π a s) / sin(π s / α) · F₊(s),  a = (α − 1)/α.
//! F₊ has poles only at s = 1, 2, …, so its contour may move left freely;
//! F₋ is analytic on −α < Re s < 1 and moving past s = −kα picks up the
//! power-tail residues ∝ |x|^{−1−kα}. Each contour's integrand is sampled
//! once on Gauss-Legendre panels; a point evaluation is then one weighted
//! sum, using whichever contour carries the least cancellation at that x.

use super::{ContourConfig, DiffusionSpec};
use crate::error::{Error, Result};
use crate::quad::gauss_legendre;
use crate::specfun::gamma::{gamma, ln_abs_rgamma, ln_gamma, ln_gamma_complex, ln_rgamma_complex, ln_sin_pi, rgamma, sin_pi};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Relative size of the integrand at which a contour is cut.
const TRUNCATION: f64 = 1e-14;
/// Panel width along Im s once past the graded start.
const PANEL: f64 = 1.0;
/// Below this |x| the negative side returns h(0).
const TINY: f64 = 1e-12;
/// Positive-side power series is tried up to this x.
const SERIES_RADIUS: f64 = 1.0;

#[derive(Debug, Clone)]
struct Contour {
    c: f64,
    t: Vec<f64>,
    /// Weight times integrand at each node.
    wf: Vec<Complex64>,
    /// Σ w |F|, the cancellation scale of the sum.
    mag: f64,
    /// (coefficient, power) of residue terms coef · x^power.
    residues: Vec<(f64, f64)>,
}

impl Contour {
    fn build<F: Fn(Complex64) -> Complex64>(c: f64, f: F, cfg: &ContourConfig) -> Result<Self> {
        let mut width = PANEL;
        loop {
            let (t, wf) = Self::sample(c, &f, cfg.t_max, width)?;
            if t.len() >= cfg.n_nodes || width < 1e-3 {
                let mag = wf.iter().map(|v| v.norm()).sum();
                return Ok(Self { c, t, wf, mag, residues: Vec::new() });
            }
            width *= 0.5;
        }
    }

    fn sample<F: Fn(Complex64) -> Complex64>(c: f64, f: &F, t_max: f64, width: f64) -> Result<(Vec<f64>, Vec<Complex64>)> {
        let rule = gauss_legendre(16);
        let start = [0.0, 0.02, 0.05, 0.1, 0.2, 0.35];
        let mut t = Vec::new();
        let mut wf = Vec::new();
        let mut peak: f64 = 0.0;
        let mut quiet = 0;
        let mut a = 0.0;
        let mut k = 1;
        loop {
            let b = if k < start.len() { start[k] } else { a + width };
            k += 1;
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for &(x, w) in rule {
                let tj = mid + half * x;
                let v = f(Complex64::new(c, tj));
                peak = peak.max(v.norm());
                t.push(tj);
                wf.push(v * (w * half));
            }
            let end = f(Complex64::new(c, b)).norm();
            peak = peak.max(end);
            quiet = if end < TRUNCATION * peak { quiet + 1 } else { 0 };
            if quiet >= 2 && b > 2.0 {
                return Ok((t, wf));
            }
            if b >= t_max {
                return Err(Error::ContourTruncation { t_max, residual: end / peak.max(f64::MIN_POSITIVE) });
            }
            a = b;
        }
    }

    /// (Σ w Re[F e^{itL}], Σ w Re[F (c − 1 + it) e^{itL}]) at L = ln x.
    fn sums(&self, ln_x: f64) -> (f64, f64) {
        let mut s0 = 0.0;
        let mut s1 = 0.0;
        let cm1 = self.c - 1.0;
        for (&t, wf) in self.t.iter().zip(&self.wf) {
            let (sn, cs) = (t * ln_x).sin_cos();
            let re = wf.re * cs - wf.im * sn;
            let im = wf.re * sn + wf.im * cs;
            s0 += re;
            s1 += cm1 * re - t * im;
        }
        (s0, s1)
    }

    fn noise(&self, x: f64) -> f64 {
        x.powf(self.c - 1.0) * self.mag
    }
}

/// Precomputed Mellin-Barnes evaluator for one (α, γ, κ).
#[derive(Debug, Clone)]
pub struct MellinBarnes {
    spec: DiffusionSpec,
    kappa: f64,
    omega: f64,
    pref: f64,
    h0: f64,
    pos: Vec<Contour>,
    neg: Vec<Contour>,
}

impl MellinBarnes {
    pub fn new(spec: &DiffusionSpec, cfg: &ContourConfig) -> Result<Self> {
        spec.validate()?;
        cfg.validate(spec)?;
        let alpha = spec.alpha;
        let kappa = spec.kappa();
        let omega = spec.omega();
        let a = (alpha - 1.0) / alpha;
        let f_pos = move |s: Complex64| -> Complex64 {
            let lg = ln_gamma_complex(1.0 - s).expect("Re s < 1 on every contour");
            match ln_rgamma_complex(kappa - omega * s) {
                Some(lr) => (lg + lr).exp(),
                None => Complex64::new(0.0, 0.0),
            }
        };
        let f_neg = move |s: Complex64| -> Complex64 {
            let ratio = ln_sin_pi(a * s) - ln_sin_pi(s / alpha);
            let v = f_pos(s) * ratio.exp();
            if v.is_finite() {
                v
            } else {
                Complex64::new(0.0, 0.0)
            }
        };

        let mut pos = vec![Contour::build(cfg.c, f_pos, cfg)?];
        for c in [0.9, -1.0, -3.0, -6.0] {
            if let Ok(k) = Contour::build(c, f_pos, cfg) {
                pos.push(k);
            }
        }
        let mut neg = vec![Contour::build(cfg.c, f_neg, cfg)?];
        for c in [0.9, -0.5 * alpha] {
            if let Ok(k) = Contour::build(c, f_neg, cfg) {
                neg.push(k);
            }
        }
        let g_kappa = gamma(kappa);
        for poles in 1..=2usize {
            let c = -(poles as f64 + 0.5) * alpha;
            if let Ok(mut k) = Contour::build(c, f_neg, cfg) {
                k.residues = (1..=poles)
                    .map(|j| {
                        let j = j as f64;
                        let sign = if j as usize % 2 == 1 { 1.0 } else { -1.0 };
                        let coef = g_kappa * sign * sin_pi(j * (alpha - 1.0)) * ln_gamma(1.0 + j * alpha).exp() * rgamma(kappa + spec.gamma * j) / PI;
                        (coef, -1.0 - j * alpha)
                    })
                    .collect();
                neg.push(k);
            }
        }
        let pref = g_kappa / (alpha * PI);
        let h0 = g_kappa / alpha * rgamma(kappa - omega);
        Ok(Self { spec: *spec, kappa, omega, pref, h0, pos, neg })
    }

    pub fn spec(&self) -> &DiffusionSpec {
        &self.spec
    }

    /// h(0) = Γ(κ) / (α Γ(κ − Ω)).
    pub fn origin(&self) -> f64 {
        self.h0
    }

    /// Σ (−x)^m / (m! Γ(κ − Ω(m + 1 + shift))), scaled by Γ(κ)/α; `None`
    /// when it does not settle or cancels too much.
    fn series(&self, x: f64, shift: f64) -> Option<f64> {
        let lnx = x.ln();
        let mut sum = 0.0;
        let mut max_term: f64 = 0.0;
        let mut prev = f64::INFINITY;
        for m in 0..600 {
            let y = self.kappa - self.omega * (m as f64 + 1.0 + shift);
            let base = m as f64 * lnx - ln_gamma(m as f64 + 1.0);
            let env = if y > 0.0 { base - ln_gamma(y) } else { base + ln_gamma(1.0 - y) - PI.ln() };
            let (lr, sr) = if y > 0.0 || y != y.round() { ln_abs_rgamma(y) } else { (f64::NEG_INFINITY, 0.0) };
            let sign = if m % 2 == 1 { -sr } else { sr };
            if sr != 0.0 {
                sum += sign * (base + lr).exp();
            }
            let e = env.exp();
            max_term = max_term.max(e);
            let falling = e < prev;
            prev = e;
            if m > 3 && falling && e < 1e-18 * max_term.max(sum.abs()) {
                if max_term * 64.0 * f64::EPSILON > 1e-12 * sum.abs().max(1e-300) {
                    return None;
                }
                return Some(sum * gamma(self.kappa) / self.spec.alpha);
            }
        }
        None
    }

    fn best(side: &[Contour], x: f64) -> &Contour {
        side.iter().min_by(|p, q| p.noise(x).total_cmp(&q.noise(x))).expect("at least one contour")
    }

    /// Standardized density and its derivative, (h(x), h'(x)).
    pub fn std_density_d(&self, x: f64) -> (f64, f64) {
        if x == 0.0 {
            // One-sided derivative from the right.
            let d = -gamma(self.kappa) / self.spec.alpha * rgamma(self.kappa - 2.0 * self.omega);
            return (self.h0, d);
        }
        if x < 0.0 && -x < TINY {
            return (self.h0, 0.0);
        }
        if x > 0.0 && x <= SERIES_RADIUS {
            if let (Some(v), Some(d)) = (self.series(x, 0.0), self.series(x, 1.0)) {
                return (v, -d);
            }
        }
        let ax = x.abs();
        let side = if x > 0.0 { &self.pos } else { &self.neg };
        let k = Self::best(side, ax);
        let (s0, s1) = k.sums(ax.ln());
        let xc = ax.powf(k.c - 1.0);
        let mut v = self.pref * xc * s0;
        let mut d = self.pref * xc / ax * s1;
        for &(coef, p) in &k.residues {
            v += coef * ax.powf(p);
            d += coef * p * ax.powf(p - 1.0);
        }
        if x < 0.0 {
            d = -d;
        }
        (v, d)
    }

    /// Standardized density h(x), clamped at round-off level.
    pub fn std_density(&self, x: f64) -> Result<f64> {
        let (v, _) = self.std_density_d(x);
        if v < -1e-9 {
            return Err(Error::NegativeDensity { value: v, at: x });
        }
        Ok(v.max(0.0))
    }

    /// Estimated absolute error of h(x) from cancellation in the sum.
    pub fn std_noise(&self, x: f64) -> f64 {
        if x == 0.0 {
            return f64::EPSILON * self.h0;
        }
        let side = if x > 0.0 { &self.pos } else { &self.neg };
        self.pref * Self::best(side, x.abs()).noise(x.abs()) * 64.0 * f64::EPSILON
    }

    /// g(ξ, τ) = h(ξ / scale) / scale.
    pub fn density(&self, xi: f64, tau: f64) -> Result<f64> {
        if !(tau > 0.0) {
            return Err(Error::Domain(format!("tau must be positive, got {tau}")));
        }
        let s = self.spec.scale(tau);
        let v = self.std_density_d(xi / s).0 / s;
        if v < -1e-9 {
            return Err(Error::NegativeDensity { value: v, at: xi });
        }
        Ok(v.max(0.0))
    }

    /// Leading power-tail coefficients b_k of h(−x) ~ Σ b_k x^{−1−kα}.
    pub fn tail_coefficients(&self, n: usize) -> Vec<f64> {
        let (alpha, g) = (self.spec.alpha, self.spec.gamma);
        let g_kappa = gamma(self.kappa);
        (1..=n)
            .map(|k| {
                let k = k as f64;
                let sign = if (k as usize) % 2 == 1 { 1.0 } else { -1.0 };
                let ln_mag = ln_gamma(1.0 + k * alpha) - ln_gamma(self.kappa + g * k);
                g_kappa * sign * sin_pi(k * (alpha - 1.0)) * ln_mag.exp() / PI
            })
            .collect()
    }

    /// Asymptotic negative-side expansion at |x| = ax, summed to its
    /// smallest term: (h, dh/d|x|, size of the last term kept).
    pub fn tail_expansion(&self, ax: f64) -> (f64, f64, f64) {
        let alpha = self.spec.alpha;
        let (mut v, mut d) = (0.0, 0.0);
        let mut last = f64::INFINITY;
        for (k, b) in self.tail_coefficients(60).into_iter().enumerate() {
            if b == 0.0 {
                continue;
            }
            let p = -1.0 - (k as f64 + 1.0) * alpha;
            let term = b * ax.powf(p);
            if !term.is_finite() || term.abs() > last {
                break;
            }
            last = term.abs();
            v += term;
            d += p * term / ax;
        }
        (v, d, if last.is_finite() { last } else { 0.0 })
    }

    /// Nodes per side over all contours (diagnostics).
    pub fn node_counts(&self) -> (usize, usize) {
        (self.pos.iter().map(|k| k.t.len()).sum(), self.neg.iter().map(|k| k.t.len()).sum())
    }
}

/// g^DF(ξ, τ) from the Mellin-Barnes integral; ξ = 0 is rejected.
pub fn green_mellin_barnes(spec: &DiffusionSpec, cfg: &ContourConfig, xi: f64, tau: f64) -> Result<f64> {
    if xi == 0.0 {
        return Err(Error::XiZero);
    }
    MellinBarnes::new(spec, cfg)?.density(xi, tau)
}

/// g^DF(0, τ) = Γ(κ) / (α Γ(κ − Ω) scale).
pub fn green_at_origin(spec: &DiffusionSpec, tau: f64) -> Result<f64> {
    spec.validate()?;
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("tau must be positive, got {tau}")));
    }
    Ok(gamma(spec.kappa()) / spec.alpha * rgamma(spec.kappa() - spec.omega()) / spec.scale(tau))
}
