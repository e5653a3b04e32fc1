//! Limited-memory BFGS with a strong Wolfe line search.

use std::collections::VecDeque;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsOptions {
    pub memory: usize,
    pub c1: f64,
    pub c2: f64,
    pub tol_grad: f64,
    pub tol_energy: f64,
    pub max_iters: usize,
    pub deadline: Option<Instant>,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions {
            memory: 10,
            c1: 1e-4,
            c2: 0.9,
            tol_grad: 1e-12,
            tol_energy: 1e-16,
            max_iters: 2000,
            deadline: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Gradient,
    EnergyDecrease,
    /// No step along the search direction lowers the energy in floating point.
    LineSearch,
    MaxIterations,
    Timeout,
    NonFinite,
}

#[derive(Debug, Clone)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_inf: f64,
    pub iterations: usize,
    pub reason: StopReason,
}

impl LbfgsResult {
    pub fn converged(&self) -> bool {
        matches!(
            self.reason,
            StopReason::Gradient | StopReason::EnergyDecrease | StopReason::LineSearch
        )
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn axpy(x: &[f64], a: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + a * di).collect()
}

/// Minimizes `f`, which returns the value and gradient at a point.
/// `on_iter(k, x, fx)` is called after every accepted step and once for the
/// starting point with `k = 0`.
pub fn minimize<F, C>(mut f: F, x0: Vec<f64>, opts: &LbfgsOptions, mut on_iter: C) -> LbfgsResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
    C: FnMut(usize, &[f64], f64),
{
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    on_iter(0, &x, fx);
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut k = 0;
    let finish = |x: Vec<f64>, fx: f64, g: &[f64], k: usize, reason| LbfgsResult {
        x,
        f: fx,
        grad_inf: inf_norm(g),
        iterations: k,
        reason,
    };
    if !fx.is_finite() {
        return finish(x, fx, &g, 0, StopReason::NonFinite);
    }
    loop {
        if inf_norm(&g) < opts.tol_grad {
            return finish(x, fx, &g, k, StopReason::Gradient);
        }
        if k >= opts.max_iters {
            return finish(x, fx, &g, k, StopReason::MaxIterations);
        }
        if opts.deadline.is_some_and(|d| Instant::now() >= d) {
            return finish(x, fx, &g, k, StopReason::Timeout);
        }
        let mut d = direction(&g, &hist);
        let mut gd = dot(&g, &d);
        if gd >= 0.0 {
            hist.clear();
            d = g.iter().map(|v| -v).collect();
            gd = dot(&g, &d);
        }
        let alpha0 = if hist.is_empty() {
            (1.0 / inf_norm(&g)).min(1.0)
        } else {
            1.0
        };
        let mut step = line_search(&mut f, &x, fx, gd, &d, alpha0, opts);
        if step.is_none() && !hist.is_empty() {
            hist.clear();
            d = g.iter().map(|v| -v).collect();
            gd = dot(&g, &d);
            step = line_search(&mut f, &x, fx, gd, &d, (1.0 / inf_norm(&g)).min(1.0), opts);
        }
        let Some((alpha, fnew, gnew)) = step else {
            return finish(x, fx, &g, k, StopReason::LineSearch);
        };
        let xnew = axpy(&x, alpha, &d);
        let s: Vec<f64> = xnew.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if hist.len() == opts.memory {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
        let decrease = fx - fnew;
        x = xnew;
        fx = fnew;
        g = gnew;
        k += 1;
        on_iter(k, &x, fx);
        if !fx.is_finite() {
            return finish(x, fx, &g, k, StopReason::NonFinite);
        }
        if decrease < opts.tol_energy {
            return finish(x, fx, &g, k, StopReason::EnergyDecrease);
        }
    }
}

/// Two-loop recursion.
fn direction(g: &[f64], hist: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut alphas = Vec::with_capacity(hist.len());
    for (s, y, rho) in hist.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = hist.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q
}

/// Cubic interpolation minimizer on `[a, b]`, falling back to bisection.
fn cubic_min(a: f64, fa: f64, ga: f64, b: f64, fb: f64, gb: f64) -> f64 {
    let d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - ga * gb;
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if disc >= 0.0 {
        let d2 = (b - a).signum() * disc.sqrt();
        let t = b - (b - a) * (gb + d2 - d1) / (gb - ga + 2.0 * d2);
        let margin = 0.1 * (hi - lo);
        if t.is_finite() && t > lo + margin && t < hi - margin {
            return t;
        }
    }
    0.5 * (a + b)
}

type Probe = (f64, Vec<f64>, f64);

fn line_search<F>(
    f: &mut F,
    x: &[f64],
    f0: f64,
    g0: f64,
    d: &[f64],
    alpha0: f64,
    opts: &LbfgsOptions,
) -> Option<(f64, f64, Vec<f64>)>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut eval = |a: f64| -> Probe {
        let (fa, ga) = f(&axpy(x, a, d));
        let slope = dot(&ga, d);
        (fa, ga, slope)
    };
    let mut a_prev = 0.0;
    let mut f_prev = f0;
    let mut s_prev = g0;
    let mut a = alpha0;
    for i in 0..40 {
        let (fa, ga, sa) = eval(a);
        if !fa.is_finite() {
            a = 0.5 * (a_prev + a);
            continue;
        }
        if fa > f0 + opts.c1 * a * g0 || (i > 0 && fa >= f_prev) {
            return zoom(
                &mut eval,
                f0,
                g0,
                (a_prev, f_prev, s_prev),
                (a, fa, sa),
                opts,
            );
        }
        if sa.abs() <= -opts.c2 * g0 {
            return Some((a, fa, ga));
        }
        if sa >= 0.0 {
            return zoom(
                &mut eval,
                f0,
                g0,
                (a, fa, sa),
                (a_prev, f_prev, s_prev),
                opts,
            );
        }
        a_prev = a;
        f_prev = fa;
        s_prev = sa;
        a *= 2.0;
    }
    None
}

fn zoom<E>(
    eval: &mut E,
    f0: f64,
    g0: f64,
    mut lo: (f64, f64, f64),
    mut hi: (f64, f64, f64),
    opts: &LbfgsOptions,
) -> Option<(f64, f64, Vec<f64>)>
where
    E: FnMut(f64) -> Probe,
{
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    for _ in 0..60 {
        if (hi.0 - lo.0).abs() <= f64::EPSILON * lo.0.abs().max(1e-300) {
            break;
        }
        let a = cubic_min(lo.0, lo.1, lo.2, hi.0, hi.1, hi.2);
        let (fa, ga, sa) = eval(a);
        if !fa.is_finite() || fa > f0 + opts.c1 * a * g0 || fa >= lo.1 {
            hi = (a, fa, sa);
            continue;
        }
        if sa.abs() <= -opts.c2 * g0 {
            return Some((a, fa, ga));
        }
        if best.as_ref().is_none_or(|b| fa < b.1) {
            best = Some((a, fa, ga.clone()));
        }
        if sa * (hi.0 - lo.0) >= 0.0 {
            hi = lo;
        }
        lo = (a, fa, sa);
    }
    // Accept the best sufficient-decrease point if curvature never settled.
    best.filter(|b| b.1 < f0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> (f64, Vec<f64>) {
        let (a, b) = (x[0], x[1]);
        let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![
            -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
            200.0 * (b - a * a),
        ];
        (f, g)
    }

    #[test]
    fn solves_rosenbrock_monotonically() {
        let mut trace = Vec::new();
        let r = minimize(
            rosenbrock,
            vec![-1.2, 1.0],
            &LbfgsOptions::default(),
            |_, _, f| trace.push(f),
        );
        assert!(r.converged());
        assert!(
            (r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6,
            "{:?}",
            r
        );
        assert!(trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn quadratic_gradient_stop() {
        let f = |x: &[f64]| {
            (
                x.iter().map(|v| v * v).sum::<f64>(),
                x.iter().map(|v| 2.0 * v).collect(),
            )
        };
        let r = minimize(
            f,
            vec![3.0, -4.0, 1.0],
            &LbfgsOptions::default(),
            |_, _, _| {},
        );
        assert!(r.f < 1e-20);
    }
}
