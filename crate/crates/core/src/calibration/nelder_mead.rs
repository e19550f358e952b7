//! Nelder-Mead simplex minimization on an unconstrained space.

/// Outcome of one simplex run.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    /// Simplex diameter fell below the tolerance.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Initial step along each coordinate.
    pub step: f64,
    /// Converged when the largest vertex distance from the best is below this.
    pub x_tol: f64,
    pub max_evals: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { step: 0.5, x_tol: 1e-4, max_evals: 400 }
    }
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let best = &simplex[0].0;
    simplex[1..]
        .iter()
        .map(|(v, _)| v.iter().zip(best).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

fn sort(simplex: &mut [(Vec<f64>, f64)]) {
    // Stable, NaN-safe ordering keeps ties deterministic.
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
}

/// Minimizes `f` from `x0` with standard coefficients (1, 2, 1/2, 1/2).
pub fn minimize<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opt: SimplexOptions) -> Minimum {
    let n = x0.len();
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opt.step;
        let fv = eval(&v, &mut evals);
        simplex.push((v, fv));
    }
    sort(&mut simplex);
    let point = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> { c.iter().zip(w).map(|(a, b)| a + t * (b - a)).collect() };
    loop {
        if diameter(&simplex) < opt.x_tol {
            let (x, f) = simplex.swap_remove(0);
            return Minimum { x, f, evals, converged: true };
        }
        if evals >= opt.max_evals {
            let (x, f) = simplex.swap_remove(0);
            return Minimum { x, f, evals, converged: false };
        }
        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for (c, a) in centroid.iter_mut().zip(v) {
                *c += a / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let xr = point(&centroid, &worst.0, -1.0);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = point(&centroid, &worst.0, -2.0);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = point(&centroid, &xr, 0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = point(&centroid, &worst.0, 0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for (v, fv) in simplex.iter_mut().skip(1) {
                    *v = point(&best, v, 0.5);
                    *fv = eval(v, &mut evals);
                }
            }
        }
        sort(&mut simplex);
    }
}
