//! Tabulated standardized density and per-maturity cumulative integrals.
//!
//! h(x) and h'(x) are sampled once per model on a sinh-spaced grid, with
//! extra geometric points approaching 0 from the left where h may carry an
//! |x|^{α−1} cusp for γ ≠ 1. Cells are cubic Hermite interpolants, bisected
//! until the interpolant reproduces h at the midpoint. Far on the
//! negative side the asymptotic power series replaces the contour integral,
//! and the mass beyond the grid is added analytically. For each maturity the
//! integrals of e^{k s x} h(x), k = 0, 1, 2, are accumulated from both ends,
//! so a price is one cell lookup plus a partial cell.

use super::{check_inputs, OptionSide, PriceResult};
use crate::error::{Error, Result};
use crate::green::{exponential_moment, ContourConfig, DiffusionSpec, MellinBarnes};
use crate::par::{self, ExecMode};
use crate::quad::gauss_legendre;

/// Step in u for x = sinh(u) on the far tail; the contour region starts at 2·DU.
const DU: f64 = 0.03;
/// Midpoint interpolation error, relative to max h, that triggers refinement.
const REFINE_TOL: f64 = 1e-8;
/// Refinement levels.
const MAX_DEPTH: usize = 14;
/// Far end of the negative side.
const X_FAR: f64 = 1e8;
/// Geometric points inserted between the first negative node and 0.
const CUSP_POINTS: i32 = 26;
/// Hard cap on the positive side.
const X_POS_CAP: f64 = 400.0;
/// Tolerance for the martingale flag.
const MARTINGALE_TOL: f64 = 1e-4;

/// h on a grid, with the analytic left tail.
#[derive(Debug, Clone)]
pub struct DensityTable {
    spec: DiffusionSpec,
    xs: Vec<f64>,
    hs: Vec<f64>,
    ds: Vec<f64>,
    tail: Vec<f64>,
    /// Largest estimated absolute error of a tabulated h.
    noise: f64,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    x: f64,
    h: f64,
    d: f64,
    e: f64,
}

fn hermite(x0: f64, h0: f64, d0: f64, x1: f64, h1: f64, d1: f64, x: f64) -> f64 {
    let dx = x1 - x0;
    let t = (x - x0) / dx;
    let t2 = t * t;
    let t3 = t2 * t;
    h0 * (2.0 * t3 - 3.0 * t2 + 1.0) + d0 * dx * (t3 - 2.0 * t2 + t) + h1 * (3.0 * t2 - 2.0 * t3) + d1 * dx * (t3 - t2)
}

fn tail_sum(coefs: &[f64], alpha: f64, ax: f64, integrated: bool) -> f64 {
    let mut v = 0.0;
    let mut last = f64::INFINITY;
    for (k, &b) in coefs.iter().enumerate() {
        if b == 0.0 {
            continue;
        }
        let ka = (k as f64 + 1.0) * alpha;
        let term = if integrated { b * ax.powf(-ka) / ka } else { b * ax.powf(-1.0 - ka) };
        if !term.is_finite() || term.abs() > last {
            break;
        }
        last = term.abs();
        v += term;
    }
    v
}

impl DensityTable {
    /// Table for `spec`, resolved far enough right that e^{s_max x} h(x)
    /// is negligible at the end.
    pub fn new(spec: &DiffusionSpec, s_max: f64, mode: ExecMode) -> Result<Self> {
        let mb = MellinBarnes::new(spec, &ContourConfig::adaptive(spec))?;
        Self::from_mellin(&mb, s_max, mode)
    }

    pub fn from_mellin(mb: &MellinBarnes, s_max: f64, mode: ExecMode) -> Result<Self> {
        let spec = *mb.spec();
        let alpha = spec.alpha;
        let tail = mb.tail_coefficients(60);

        // Where the asymptotic series may stand in for the contour.
        let mut switch = f64::INFINITY;
        for r in [20.0, 50.0, 150.0, 500.0, 2000.0] {
            let (vc, _) = mb.std_density_d(-r);
            let (vt, _, last) = mb.tail_expansion(r);
            let tol = 1e-10 * vc.abs() + 10.0 * mb.std_noise(-r);
            if (vc - vt).abs() <= tol && last <= 1e-11 * vt.abs().max(1e-300) + tol {
                switch = r;
                break;
            }
        }

        // Right end: first probe where h vanishes below resolution and the
        // exponentially weighted remainder is negligible.
        let h0 = mb.origin();
        let mut x_hi = 2.0;
        loop {
            let (v, _) = mb.std_density_d(x_hi);
            let floor = 10.0 * mb.std_noise(x_hi);
            let resolved = v > floor && v >= 1e-30 * h0;
            if !resolved && v.max(0.0) * (s_max * x_hi).exp() < 1e-16 || x_hi >= X_POS_CAP {
                break;
            }
            x_hi *= 1.25;
        }
        let x_hi = x_hi.min(X_POS_CAP);

        let eval = |x: f64| -> (f64, f64, f64) {
            if x < 0.0 && -x >= switch {
                let (_, d, _) = mb.tail_expansion(-x);
                (tail_sum(&tail, alpha, -x, false), -d, 0.0)
            } else {
                let (v, d) = mb.std_density_d(x);
                let noise = mb.std_noise(x);
                if x > 0.0 && v <= 10.0 * noise {
                    (0.0, 0.0, noise)
                } else {
                    (v, d, noise)
                }
            }
        };

        // Coarse start: sinh spacing, geometric points into the cusp at 0−.
        let mut xs: Vec<f64> = Vec::new();
        let n_neg = (X_FAR.asinh() / DU).ceil() as i64;
        for j in (1..=n_neg).rev() {
            let x = -(j as f64 * DU).sinh();
            if -x >= switch || j % 2 == 0 {
                xs.push(x);
            }
        }
        let first = xs.last().copied().unwrap_or(-DU);
        for k in 1..=CUSP_POINTS {
            xs.push(first * 0.5f64.powi(k));
        }
        xs.push(0.0);
        let n_pos = (x_hi.asinh() / (2.0 * DU)).ceil() as i64;
        for j in 1..=n_pos {
            xs.push((j as f64 * 2.0 * DU).sinh());
        }
        let vals = par::map(mode, &xs, |&x| eval(x));
        let mut nodes: Vec<Node> = xs.iter().zip(vals).map(|(&x, (h, d, e))| Node { x, h, d, e }).collect();

        // Refine every contour-region cell whose Hermite midpoint misses the
        // evaluated value; each probe becomes a node.
        let h_max = nodes.iter().map(|n| n.h).fold(0.0, f64::max);
        let tol = REFINE_TOL * h_max;
        let mut cells: Vec<(Node, Node)> = nodes
            .windows(2)
            .filter(|w| w[1].x > -switch && !(w[0].x < 0.0 && w[1].x == 0.0))
            .map(|w| (w[0], w[1]))
            .collect();
        for _ in 0..MAX_DEPTH {
            if cells.is_empty() {
                break;
            }
            let mids = par::map(mode, &cells, |(l, r)| {
                let xm = 0.5 * (l.x + r.x);
                let (h, d, e) = eval(xm);
                Node { x: xm, h, d, e }
            });
            let mut next = Vec::new();
            for ((l, r), m) in cells.iter().zip(mids) {
                let guess = hermite(l.x, l.h, l.d, r.x, r.h, r.d, m.x);
                if (guess - m.h).abs() > tol + 10.0 * m.e && r.x - l.x > 1e-9 {
                    next.push((*l, m));
                    next.push((m, *r));
                }
                nodes.push(m);
            }
            cells = next;
        }
        nodes.sort_by(|a, b| a.x.total_cmp(&b.x));

        let mut xs = Vec::with_capacity(nodes.len());
        let mut hs = Vec::with_capacity(nodes.len());
        let mut ds = Vec::with_capacity(nodes.len());
        let mut noise: f64 = 0.0;
        for n in &nodes {
            if !n.h.is_finite() || !n.d.is_finite() {
                return Err(Error::NonConvergence { what: "density table", detail: format!("non-finite h at x={}", n.x) });
            }
            if n.h < -1e-9 {
                return Err(Error::NegativeDensity { value: n.h, at: n.x });
            }
            xs.push(n.x);
            hs.push(n.h.max(0.0));
            ds.push(n.d);
            noise = noise.max(n.e);
        }
        Ok(Self { spec, xs, hs, ds, tail, noise })
    }

    /// Largest estimated absolute error of a tabulated h value.
    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn spec(&self) -> &DiffusionSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Grid extent [x_lo, x_hi].
    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Mass of h below x (x at or left of the grid start).
    pub fn left_mass(&self, x: f64) -> f64 {
        tail_sum(&self.tail, self.spec.alpha, -x, true)
    }

    fn cell(&self, x: f64) -> usize {
        let i = self.xs.partition_point(|&v| v <= x);
        i.saturating_sub(1).min(self.xs.len() - 2)
    }

    /// Interpolated h inside cell i.
    fn interp(&self, i: usize, x: f64) -> f64 {
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let dx = x1 - x0;
        let t = (x - x0) / dx;
        let (h0, h1) = (self.hs[i], self.hs[i + 1]);
        if x1 == 0.0 && x0 < 0.0 {
            return h0 + t * (h1 - h0);
        }
        hermite(x0, h0, self.ds[i], x1, h1, self.ds[i + 1], x)
    }

    /// Standardized density at x: interpolated on the grid, asymptotic on
    /// the far left, zero beyond the right end.
    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.range();
        if x < lo {
            return tail_sum(&self.tail, self.spec.alpha, -x, false);
        }
        if x > hi {
            return 0.0;
        }
        self.interp(self.cell(x), x).max(0.0)
    }

    /// ∫_a^b f(x) h(x) dx over the grid part of [a, b], six Gauss points per cell.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let (lo, hi) = self.range();
        let (a, b) = (a.max(lo), b.min(hi));
        if !(a < b) {
            return 0.0;
        }
        let (ia, ib) = (self.cell(a), self.cell(b));
        let mut sum = 0.0;
        for i in ia..=ib {
            let l = if i == ia { a } else { self.xs[i] };
            let r = if i == ib { b } else { self.xs[i + 1] };
            if r > l {
                sum += self.gl(i, l, r, &f);
            }
        }
        sum
    }

    fn gl<F: Fn(f64) -> f64>(&self, i: usize, l: f64, r: f64, f: &F) -> f64 {
        let (mid, half) = (0.5 * (l + r), 0.5 * (r - l));
        gauss_legendre(6).iter().map(|&(t, w)| {
            let x = mid + half * t;
            w * f(x) * self.interp(i, x)
        }).sum::<f64>()
            * half
    }

    /// Cumulative integrals for log-return scale s.
    pub fn slice(&self, s: f64) -> MaturitySlice {
        let n = self.xs.len();
        let mut cells = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let (l, r) = (self.xs[i], self.xs[i + 1]);
            let j = |k: f64| self.gl(i, l, r, &|x: f64| (k * s * x).exp());
            cells.push([j(0.0), j(1.0), j(2.0)]);
        }
        let (lo, _) = self.range();
        let left0 = self.left_mass(lo);
        let mut lower = vec![[0.0; 3]; n];
        lower[0] = [left0, 0.0, 0.0];
        for i in 0..n - 1 {
            for k in 0..3 {
                lower[i + 1][k] = lower[i][k] + cells[i][k];
            }
        }
        let mut upper = vec![[0.0; 3]; n];
        for i in (0..n - 1).rev() {
            for k in 0..3 {
                upper[i][k] = upper[i + 1][k] + cells[i][k];
            }
        }
        let totals = lower[n - 1];
        // e^{k s x} ≤ e^{k s x_lo} below the grid.
        let left_bound = left0 * (s * lo).exp();
        MaturitySlice { s, lower, upper, totals, left_bound }
    }
}

/// Cumulative integrals of e^{k s x} h(x), k = 0, 1, 2, for one scale s.
#[derive(Debug, Clone)]
pub struct MaturitySlice {
    s: f64,
    lower: Vec<[f64; 3]>,
    upper: Vec<[f64; 3]>,
    totals: [f64; 3],
    left_bound: f64,
}

impl MaturitySlice {
    pub fn scale(&self) -> f64 {
        self.s
    }

    /// Numerical ∫ e^{k s x} h dx over the whole line.
    pub fn total(&self, k: usize) -> f64 {
        self.totals[k]
    }

    /// ∫_{x}^{∞} e^{k s x'} h(x') dx' for k = 0, 1, 2.
    pub fn upper(&self, table: &DensityTable, x: f64) -> [f64; 3] {
        let (lo, hi) = table.range();
        if x >= hi {
            return [0.0; 3];
        }
        if x <= lo {
            let m = table.left_mass(x) - table.left_mass(lo);
            return [self.upper[0][0] + m, self.upper[0][1], self.upper[0][2]];
        }
        let i = table.cell(x);
        let mut out = self.upper[i + 1];
        for (k, o) in out.iter_mut().enumerate() {
            *o += table.gl(i, x, table.xs[i + 1], &|y: f64| (k as f64 * self.s * y).exp());
        }
        out
    }

    /// ∫_{−∞}^{x} e^{k s x'} h(x') dx' for k = 0, 1, 2.
    pub fn lower(&self, table: &DensityTable, x: f64) -> [f64; 3] {
        let (lo, hi) = table.range();
        if x >= hi {
            return self.totals;
        }
        if x <= lo {
            return [table.left_mass(x), 0.0, 0.0];
        }
        let i = table.cell(x);
        let mut out = self.lower[i];
        for (k, o) in out.iter_mut().enumerate() {
            *o += table.gl(i, table.xs[i], x, &|y: f64| (k as f64 * self.s * y).exp());
        }
        out
    }
}

/// Per-maturity data the pricer needs.
#[derive(Debug, Clone)]
struct Leg {
    tau: f64,
    slice: MaturitySlice,
    /// Exact ⟨e^{s x}⟩ and its numerical deviation.
    moment: f64,
    martingale_dev: f64,
}

/// Prices European options for one model across a set of maturities.
#[derive(Debug, Clone)]
pub struct DfPricer {
    table: DensityTable,
    legs: Vec<Leg>,
}

impl DfPricer {
    pub fn new(spec: &DiffusionSpec, maturities: &[f64]) -> Result<Self> {
        Self::with_mode(spec, maturities, ExecMode::Parallel)
    }

    pub fn with_mode(spec: &DiffusionSpec, maturities: &[f64], mode: ExecMode) -> Result<Self> {
        spec.validate()?;
        if maturities.is_empty() || maturities.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::Domain("pricer needs positive maturities".into()));
        }
        let s_max = maturities.iter().map(|&t| spec.scale(t)).fold(0.0, f64::max);
        let table = DensityTable::new(spec, 2.0 * s_max, mode)?;
        let mut legs = Vec::with_capacity(maturities.len());
        for &tau in maturities {
            legs.push(Self::leg(&table, tau)?);
        }
        Ok(Self { table, legs })
    }

    fn leg(table: &DensityTable, tau: f64) -> Result<Leg> {
        let spec = table.spec();
        let slice = table.slice(spec.scale(tau));
        let moment = exponential_moment(spec, tau)?;
        let martingale_dev = slice.total(1) / moment - 1.0;
        Ok(Leg { tau, slice, moment, martingale_dev })
    }

    pub fn spec(&self) -> &DiffusionSpec {
        self.table.spec()
    }

    pub fn table(&self) -> &DensityTable {
        &self.table
    }

    /// Slice, exact exponential moment and drift μ(τ) for a maturity;
    /// untabulated maturities are built on the fly.
    pub fn maturity(&self, tau: f64) -> Result<(MaturitySlice, f64, f64)> {
        let leg = match self.legs.iter().find(|l| l.tau == tau) {
            Some(l) => l.clone(),
            None => Self::leg(&self.table, tau)?,
        };
        let mu = -leg.moment.ln() / tau;
        Ok((leg.slice, leg.moment, mu))
    }

    /// Relative deviation of the numerical ⟨e^{s x}⟩ from the exact moment,
    /// i.e. of the discounted expected spot from spot.
    pub fn martingale_deviation(&self, tau: f64) -> Result<f64> {
        match self.legs.iter().find(|l| l.tau == tau) {
            Some(l) => Ok(l.martingale_dev),
            None => Ok(Self::leg(&self.table, tau)?.martingale_dev),
        }
    }

    pub fn price(&self, s: f64, k: f64, tau: f64, r: f64, q: f64, side: OptionSide) -> Result<PriceResult> {
        check_inputs(s, k, tau)?;
        let leg = match self.legs.iter().find(|l| l.tau == tau) {
            Some(l) => std::borrow::Cow::Borrowed(l),
            None => std::borrow::Cow::Owned(Self::leg(&self.table, tau)?),
        };
        let table = &self.table;
        let sl = &leg.slice;
        let disc = (-r * tau).exp();
        let fwd = s * ((r - q) * tau).exp();
        // S e^{τ(r − q + μ)} with e^{τμ} = 1 / ⟨e^{s x}⟩.
        let a = fwd / leg.moment;
        let xk = (k / a).ln() / sl.s;
        let call_otm = k >= fwd;
        let direct = if call_otm {
            let u = sl.upper(table, xk);
            disc * (a * u[1] - k * u[0])
        } else {
            let l = sl.lower(table, xk);
            disc * (k * l[0] - a * l[1])
        };
        let parity = s * (-q * tau).exp() - k * disc;
        let value = match (side, call_otm) {
            (OptionSide::Call, true) | (OptionSide::Put, false) => direct,
            (OptionSide::Call, false) => direct + parity,
            (OptionSide::Put, true) => direct - parity,
        };
        let err0 = (sl.total(0) - 1.0).abs();
        let err1 = leg.martingale_dev.abs() * leg.moment + sl.left_bound;
        let quadrature_error = disc * (k * err0 + a * err1) + 1e-13 * (s + k);
        if value < -1e-8 {
            return Err(Error::NegativePrice(value));
        }
        Ok(PriceResult {
            value: value.max(0.0),
            quadrature_error,
            drift_mu: -leg.moment.ln() / tau,
            martingale_ok: leg.martingale_dev.abs() <= MARTINGALE_TOL,
            formal: self.spec().gamma > 1.0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::DerivativeKind;
    use crate::pricing::bs_price;

    #[test]
    fn gaussian_table_matches_black_scholes() {
        let spec = DiffusionSpec::levy(2.0, 0.2).unwrap();
        let p = DfPricer::new(&spec, &[0.5, 1.0]).unwrap();
        for &k in &[80.0, 100.0, 125.0] {
            for &tau in &[0.5, 1.0] {
                for side in [OptionSide::Call, OptionSide::Put] {
                    let v = p.price(100.0, k, tau, 0.03, 0.01, side).unwrap();
                    let b = bs_price(100.0, k, tau, 0.03, 0.01, 0.2 * 2f64.sqrt(), side).unwrap();
                    assert!((v.value - b.value).abs() < 1e-7 * b.value.max(1.0), "K={k} tau={tau} {side:?}: {} vs {}", v.value, b.value);
                    assert!(v.martingale_ok);
                }
            }
        }
    }

    #[test]
    fn normalization_of_tables() {
        for &(a, g, kind) in &[(1.5, 1.0, DerivativeKind::Caputo), (1.7, 0.8, DerivativeKind::RieszFeller), (1.6, 1.2, DerivativeKind::Caputo)] {
            let spec = DiffusionSpec::new(a, g, kind, 0.2).unwrap();
            let t = DensityTable::new(&spec, 0.5, ExecMode::Sequential).unwrap();
            let sl = t.slice(0.1);
            assert!((sl.total(0) - 1.0).abs() < 1e-8, "{a} {g}: {}", sl.total(0));
        }
    }
}
