//! Fractional calculus on sampled functions, used as test oracles.
//!
//! Integrals use product integration: f is interpolated piecewise
//! linearly and each segment is integrated exactly against (x − y)^{ν−1}.
//! Riemann-Liouville derivatives differentiate the (m − ν)-integral with
//! fourth-order centred differences; Caputo derivatives integrate the
//! m-th derivative, so constants map to exactly zero. Riesz-Feller
//! operators are applied spectrally on a uniform symmetric grid.

use crate::error::{Error, Result};
use crate::specfun::gamma::rgamma;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Samples (xs, ys) of a function on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl GridFunction {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::Domain(format!("grid has {} abscissae but {} values", xs.len(), ys.len())));
        }
        if xs.len() < 4 {
            return Err(Error::Domain(format!("grid needs at least 4 points, got {}", xs.len())));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) || xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::Domain("grid must be finite and strictly increasing".into()));
        }
        Ok(Self { xs, ys })
    }

    /// Samples `f` at the given points.
    pub fn sample<F: FnMut(f64) -> f64>(xs: Vec<f64>, f: F) -> Result<Self> {
        let ys = xs.iter().copied().map(f).collect();
        Self::new(xs, ys)
    }

    /// `n` equally spaced points on [a, b].
    pub fn uniform<F: FnMut(f64) -> f64>(a: f64, b: f64, n: usize, f: F) -> Result<Self> {
        let n1 = n.max(2) - 1;
        let xs = (0..n).map(|j| a + (b - a) * j as f64 / n1 as f64).collect();
        Self::sample(xs, f)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    fn check_inside(&self, x: f64) -> Result<()> {
        let (lo, hi) = (self.xs[0], self.xs[self.xs.len() - 1]);
        if x >= lo && x <= hi {
            Ok(())
        } else {
            Err(Error::OutsideGrid { x, lo, hi })
        }
    }

    /// Index i with xs[i] ≤ x ≤ xs[i+1].
    fn segment(&self, x: f64) -> usize {
        let i = self.xs.partition_point(|&v| v <= x);
        i.clamp(1, self.xs.len() - 1) - 1
    }

    /// Piecewise-linear interpolant.
    pub fn interp(&self, x: f64) -> Result<f64> {
        self.check_inside(x)?;
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let t = (x - x0) / (x1 - x0);
        Ok(self.ys[i] + t * (self.ys[i + 1] - self.ys[i]))
    }

    /// Applies `g` pointwise to the values.
    pub fn map<F: FnMut(f64, f64) -> f64>(&self, mut g: F) -> Self {
        let ys = self.xs.iter().zip(&self.ys).map(|(&x, &y)| g(x, y)).collect();
        Self { xs: self.xs.clone(), ys }
    }
}

/// Order ν > 0 and lower terminal x₀ of a fractional operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder {
    pub nu: f64,
    pub origin: f64,
}

impl FracOrder {
    pub fn new(nu: f64, origin: f64) -> Result<Self> {
        if nu > 0.0 && nu.is_finite() && origin.is_finite() {
            Ok(Self { nu, origin })
        } else {
            Err(Error::Domain(format!("fractional order must be positive, got {nu}")))
        }
    }

    /// ⌈ν⌉
    pub fn ceil(&self) -> usize {
        self.nu.ceil() as usize
    }
}

/// Breakpoints of [x₀, x] with the linear interpolant's values there.
fn pieces(f: &GridFunction, x0: f64, x: f64) -> Result<Vec<(f64, f64)>> {
    f.check_inside(x0)?;
    f.check_inside(x)?;
    if x < x0 {
        return Err(Error::Domain(format!("evaluation point {x} lies left of the origin {x0}")));
    }
    let mut out = vec![(x0, f.interp(x0)?)];
    for (&xi, &yi) in f.xs.iter().zip(&f.ys) {
        if xi > x0 && xi < x {
            out.push((xi, yi));
        }
    }
    if x > x0 {
        out.push((x, f.interp(x)?));
    }
    Ok(out)
}

/// ∫ (x − y)^{ν−1} f(y) dy over the polyline `pts`, each segment exact.
fn product_integral(pts: &[(f64, f64)], nu: f64, x: f64) -> f64 {
    let mut sum = 0.0;
    for w in pts.windows(2) {
        let ((a, fa), (b, fb)) = (w[0], w[1]);
        let s = (fb - fa) / (b - a);
        let (ua, ub) = (x - a, (x - b).max(0.0));
        let m0 = (ua.powf(nu) - ub.powf(nu)) / nu;
        let m1 = (ua.powf(nu + 1.0) - ub.powf(nu + 1.0)) / (nu + 1.0);
        // f(y) = fa + s(y − a) with y = x − u
        sum += (fa + s * ua) * m0 - s * m1;
    }
    sum
}

/// Riemann-Liouville integral (1/Γ(ν)) ∫_{x₀}^{x} (x − y)^{ν−1} f(y) dy.
pub fn rl_integral(f: &GridFunction, o: FracOrder, x: f64) -> Result<f64> {
    let pts = pieces(f, o.origin, x)?;
    Ok(product_integral(&pts, o.nu, x) * rgamma(o.nu))
}

/// Step for the centred stencil at x: local grid spacing, shrunk to fit.
fn stencil_step(f: &GridFunction, o: FracOrder, x: f64) -> Result<f64> {
    f.check_inside(x)?;
    let i = f.segment(x);
    let local = f.xs[i + 1] - f.xs[i];
    let hi = f.xs[f.len() - 1];
    let h = local.min((x - o.origin) / 2.0).min((hi - x) / 2.0);
    if !(h > 0.0) {
        return Err(Error::Domain(format!("no room for a centred stencil at x={x}")));
    }
    Ok(h)
}

/// Fourth-order centred m-th derivative of `g` at x with step h.
fn centred_derivative<G: FnMut(f64) -> Result<f64>>(mut g: G, m: usize, x: f64, h: f64) -> Result<f64> {
    let v: Vec<f64> = [-2.0, -1.0, 0.0, 1.0, 2.0].iter().map(|k| g(x + k * h)).collect::<Result<_>>()?;
    match m {
        0 => Ok(v[2]),
        1 => Ok((v[0] - 8.0 * v[1] + 8.0 * v[3] - v[4]) / (12.0 * h)),
        2 => Ok((-v[0] + 16.0 * v[1] - 30.0 * v[2] + 16.0 * v[3] - v[4]) / (12.0 * h * h)),
        3 => {
            // Seven-point rule keeps fourth order for the third derivative.
            let e: Vec<f64> = [-3.0, 3.0].iter().map(|k| g(x + k * h)).collect::<Result<_>>()?;
            Ok((e[0] - 8.0 * v[0] + 13.0 * v[1] - 13.0 * v[3] + 8.0 * v[4] - e[1]) / (8.0 * h * h * h))
        }
        _ => Err(Error::Domain(format!("derivatives above order 3 are not supported (m={m})"))),
    }
}

/// Riemann-Liouville derivative dᵐ/dxᵐ I^{m−ν} f with m = ⌈ν⌉.
pub fn rl_derivative(f: &GridFunction, o: FracOrder, x: f64) -> Result<f64> {
    let m = o.ceil();
    let rest = m as f64 - o.nu;
    let mut h = stencil_step(f, o, x)?;
    if m == 3 {
        h = h.min((x - o.origin) / 3.0).min((f.xs[f.len() - 1] - x) / 3.0);
    }
    let g = |y: f64| -> Result<f64> {
        if rest == 0.0 {
            f.interp(y)
        } else {
            rl_integral(f, FracOrder { nu: rest, origin: o.origin }, y)
        }
    };
    centred_derivative(g, m, x, h)
}

/// Finite-difference weights for the m-th derivative at z from the nodes
/// `x` (Fornberg's recursion).
fn fornberg(z: f64, x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Derivative of order m ≥ 1 at every node, written as Σ w (f_k − f_i) so
/// that constants give exactly zero.
fn nodal_derivative(f: &GridFunction, m: usize) -> Vec<f64> {
    let n = f.len();
    let width = (m + 4).min(n);
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(width / 2).min(n - width);
            let idx: Vec<usize> = (start..start + width).collect();
            let xs: Vec<f64> = idx.iter().map(|&k| f.xs[k]).collect();
            let w = fornberg(f.xs[i], &xs, m);
            idx.iter().zip(&w).map(|(&k, &wk)| if k == i { 0.0 } else { wk * (f.ys[k] - f.ys[i]) }).sum()
        })
        .collect()
}

/// Caputo derivative (1/Γ(m − ν)) ∫_{x₀}^{x} f^{(m)}(y) (x − y)^{m−ν−1} dy.
///
/// f^{(m−1)} is interpolated piecewise linearly (f itself when m = 1), so
/// f^{(m)} is piecewise constant and each segment is integrated exactly.
/// Integer orders return the ordinary derivative.
pub fn caputo_derivative(f: &GridFunction, o: FracOrder, x: f64) -> Result<f64> {
    let m = o.ceil();
    let rest = m as f64 - o.nu;
    let lower = if m == 1 { f.clone() } else { GridFunction { xs: f.xs.clone(), ys: nodal_derivative(f, m - 1) } };
    if rest == 0.0 {
        let h = stencil_step(&lower, o, x)?;
        return centred_derivative(|y| lower.interp(y), 1, x, h);
    }
    let pts = pieces(&lower, o.origin, x)?;
    let mut sum = 0.0;
    for w in pts.windows(2) {
        let ((a, ga), (b, gb)) = (w[0], w[1]);
        let slope = (gb - ga) / (b - a);
        if slope != 0.0 {
            let (ua, ub) = (x - a, (x - b).max(0.0));
            sum += slope * (ua.powf(rest) - ub.powf(rest)) / rest;
        }
    }
    Ok(sum * rgamma(rest))
}

/// Ratio of the largest boundary magnitude to the peak magnitude.
pub fn boundary_ratio(f: &GridFunction) -> f64 {
    let peak = f.ys.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let edge = f.ys[0].abs().max(f.ys[f.len() - 1].abs());
    if peak == 0.0 {
        0.0
    } else {
        edge / peak
    }
}

/// Riesz-Feller operator with symbol H_{α,θ}(k) = −|k|^α e^{i sign(k) θπ/2},
/// applied by FFT on a uniform grid symmetric about 0. The signal is zero
/// padded to four times its length so the non-local tails do not wrap.
pub fn riesz_feller_apply(f: &GridFunction, alpha: f64, theta: f64) -> Result<GridFunction> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::Domain(format!("Riesz-Feller order must lie in (0, 2], got {alpha}")));
    }
    let bound = alpha.min(2.0 - alpha);
    if theta.abs() > bound + 1e-12 {
        return Err(Error::ThetaOutsideDiamond { theta, bound });
    }
    let n = f.len();
    let dx = (f.xs[n - 1] - f.xs[0]) / (n - 1) as f64;
    let uniform = f.xs.iter().enumerate().all(|(j, &x)| (x - (f.xs[0] + j as f64 * dx)).abs() <= 1e-9 * dx.max(x.abs()));
    if !uniform || (f.xs[0] + f.xs[n - 1]).abs() > 1e-9 * f.xs[n - 1].abs().max(1.0) {
        return Err(Error::GridNotSymmetric("Riesz-Feller application needs a uniform grid symmetric about 0".into()));
    }
    let m = (4 * n).next_power_of_two();
    let mut buf: Vec<Complex64> = (0..m).map(|j| Complex64::new(if j < n { f.ys[j] } else { 0.0 }, 0.0)).collect();
    let mut planner = FftPlanner::new();
    // Σ f_j e^{+ikx_j}: the unnormalized inverse transform; the phase from
    // x₀ cancels on the way back.
    planner.plan_fft_inverse(m).process(&mut buf);
    let phase = Complex64::from_polar(1.0, theta * PI / 2.0);
    for (j, v) in buf.iter_mut().enumerate() {
        let signed = if j <= m / 2 { j as f64 } else { j as f64 - m as f64 };
        let k = 2.0 * PI * signed / (m as f64 * dx);
        let symbol = if j == 0 {
            Complex64::new(0.0, 0.0)
        } else if j == m / 2 {
            // Nyquist: keep only the part that is even in k.
            Complex64::new(-k.abs().powf(alpha) * phase.re, 0.0)
        } else if k > 0.0 {
            -k.powf(alpha) * phase
        } else {
            -(-k).powf(alpha) * phase.conj()
        };
        *v *= symbol;
    }
    planner.plan_fft_forward(m).process(&mut buf);
    let ys = buf[..n].iter().map(|v| v.re / m as f64).collect();
    Ok(GridFunction { xs: f.xs.clone(), ys })
}
