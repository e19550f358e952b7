//! Quadrature helpers: adaptive Gauss-Kronrod (7/15) over a set of initial
//! panels, and cached Gauss-Legendre rules for fixed-node sums.

use crate::error::{Error, Result};
use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use std::collections::BinaryHeap;
use std::cmp::Ordering;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss-Kronrod 15-point panel: returns (Kronrod estimate, |K15 - G7|).
pub fn gk15<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k = k + s * WGK[j];
        if j % 2 == 1 {
            g = g + s * WG[j / 2];
        }
    }
    let k = k * h;
    let g = g * h;
    (k, (k - g).magnitude())
}

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-10, max_panels: 4000 }
    }
}

impl QuadConfig {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }
}

/// Integration outcome with its error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: f64,
    pub panels: usize,
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive GK15 integration of `f` over the union of the panels
/// delimited by `breaks` (sorted ascending). The panel with the largest
/// error estimate is bisected until the total error meets the tolerance.
pub fn integrate<T, F>(mut f: F, breaks: &[f64], cfg: QuadConfig) -> Result<Quadrature<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut err = 0.0;
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e) = gk15(&mut f, w[0], w[1]);
        total = total + v;
        err += e;
        heap.push(Panel { a: w[0], b: w[1], value: v, err: e });
    }
    let mut panels = heap.len();
    while err > cfg.abs_tol.max(cfg.rel_tol * total.magnitude()) {
        if panels >= cfg.max_panels {
            return Err(Error::QuadratureBudget { estimate: total.magnitude(), error: err, evals: panels * 15 });
        }
        let Some(worst) = heap.pop() else { break };
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // Panel can no longer be split in floating point; accept it.
            heap.push(Panel { err: 0.0, ..worst });
            err = heap.iter().map(|p| p.err).sum();
            continue;
        }
        let (v1, e1) = gk15(&mut f, worst.a, m);
        let (v2, e2) = gk15(&mut f, m, worst.b);
        total = total - worst.value + v1 + v2;
        err += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: m, value: v1, err: e1 });
        heap.push(Panel { a: m, b: worst.b, value: v2, err: e2 });
        panels += 1;
    }
    // Re-sum from the panels to shed accumulated update round-off.
    let mut value = T::zero();
    let mut error = 0.0;
    for p in heap.iter() {
        value = value + p.value;
        error += p.err;
    }
    Ok(Quadrature { value, error, panels })
}

/// Breakpoints that grade geometrically toward `a` (`levels` halvings of
/// the first panel), then finish at `b`.
pub fn graded_breaks(a: f64, b: f64, levels: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..levels).map(|k| a + (b - a) * 0.5f64.powi((levels - k) as i32)).collect();
    v.insert(0, a);
    v.push(b);
    v
}

/// Gauss-Legendre nodes and weights on [-1, 1], cached for the orders used here.
pub fn gauss_legendre(n: usize) -> &'static [(f64, f64)] {
    static GL6: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    static GL16: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    static GL32: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    let build = |n: usize| {
        let rule = GaussLegendre::new(n).expect("order >= 2");
        let mut v: Vec<(f64, f64)> = rule.nodes().copied().zip(rule.weights().copied()).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    };
    match n {
        6 => GL6.get_or_init(|| build(6)),
        16 => GL16.get_or_init(|| build(16)),
        32 => GL32.get_or_init(|| build(32)),
        _ => panic!("unsupported Gauss-Legendre order {n}"),
    }
}

/// Fixed-order Gauss-Legendre sum over [a, b].
pub fn gl_fixed<F: FnMut(f64) -> f64>(n: usize, a: f64, b: f64, mut f: F) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    gauss_legendre(n).iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>() * h
}
