//! Limited-memory BFGS with a strong-Wolfe line search.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy)]
pub struct LbfgsConfig {
    pub memory: usize,
    pub max_iter: usize,
    /// Stop once `||g||_inf < grad_tol * (1 + |f|)`.
    pub grad_tol: f64,
    pub c1: f64,
    pub c2: f64,
    pub max_line_search: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iter: 500,
            grad_tol: 1e-6,
            c1: 1e-4,
            c2: 0.9,
            max_line_search: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    MaxIterations,
    /// No step along the search direction decreased the objective.
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub struct LbfgsOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub termination: Termination,
}

/// Objective evaluated at a non-finite value at the starting point.
#[derive(Debug, Clone, Copy)]
pub struct NonFiniteStart;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct Point {
    alpha: f64,
    f: f64,
    dphi: f64,
}

struct Evaluator<'a, F> {
    func: &'a mut F,
    x: &'a [f64],
    d: &'a [f64],
    trial: Vec<f64>,
    grad: Vec<f64>,
}

impl<F: FnMut(&[f64], &mut [f64]) -> f64> Evaluator<'_, F> {
    fn eval(&mut self, alpha: f64) -> Point {
        for ((t, x), d) in self.trial.iter_mut().zip(self.x).zip(self.d) {
            *t = x + alpha * d;
        }
        let f = (self.func)(&self.trial, &mut self.grad);
        let dphi = dot(&self.grad, self.d);
        Point { alpha, f, dphi }
    }
}

/// Safeguarded cubic interpolation for the minimizer between two bracket ends.
fn interpolate(lo: &Point, hi: &Point) -> f64 {
    let (a, b) = (lo.alpha, hi.alpha);
    let d1 = lo.dphi + hi.dphi - 3.0 * (lo.f - hi.f) / (a - b);
    let disc = d1 * d1 - lo.dphi * hi.dphi;
    let width = (b - a).abs();
    let (left, right) = (a.min(b), a.max(b));
    let bisect = 0.5 * (a + b);
    if disc < 0.0 {
        return bisect;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let t = b - (b - a) * (hi.dphi + d2 - d1) / (hi.dphi - lo.dphi + 2.0 * d2);
    if t.is_finite() && t > left + 0.1 * width && t < right - 0.1 * width {
        t
    } else {
        bisect
    }
}

/// Returns the accepted step with the gradient at the new point stored in the
/// evaluator, or `None` if no acceptable step was found.
fn line_search<F: FnMut(&[f64], &mut [f64]) -> f64>(
    ev: &mut Evaluator<'_, F>,
    f0: f64,
    dphi0: f64,
    alpha0: f64,
    cfg: &LbfgsConfig,
) -> Option<Point> {
    let armijo = |p: &Point| p.f <= f0 + cfg.c1 * p.alpha * dphi0;
    let curvature = |p: &Point| p.dphi.abs() <= -cfg.c2 * dphi0;

    let mut prev = Point {
        alpha: 0.0,
        f: f0,
        dphi: dphi0,
    };
    let mut alpha = alpha0;
    let mut bracket = None;
    for i in 0..cfg.max_line_search {
        let p = ev.eval(alpha);
        if !p.f.is_finite() {
            alpha = 0.5 * (prev.alpha + alpha);
            continue;
        }
        if !armijo(&p) || (i > 0 && p.f >= prev.f) {
            bracket = Some((prev, p));
            break;
        }
        if curvature(&p) {
            return Some(p);
        }
        if p.dphi >= 0.0 {
            bracket = Some((p, prev));
            break;
        }
        alpha *= 2.0;
        prev = p;
    }
    let (mut lo, mut hi) = bracket?;

    for _ in 0..cfg.max_line_search {
        let alpha = interpolate(&lo, &hi);
        let p = ev.eval(alpha);
        if !p.f.is_finite() || !armijo(&p) || p.f >= lo.f {
            hi = p;
        } else {
            if curvature(&p) {
                return Some(p);
            }
            if p.dphi * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = p;
        }
        if (hi.alpha - lo.alpha).abs() < 1e-16 * lo.alpha.abs().max(1.0) {
            break;
        }
    }
    // Fall back to the best sufficient-decrease point seen in the bracket.
    if lo.alpha > 0.0 {
        let p = ev.eval(lo.alpha);
        return Some(p);
    }
    None
}

/// Minimizes `func`, which returns the objective and writes the gradient into
/// its second argument.
pub fn minimize<F>(mut func: F, x0: Vec<f64>, cfg: &LbfgsConfig) -> Result<LbfgsOutcome, NonFiniteStart>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut f = func(&x, &mut g);
    if !f.is_finite() || !g.iter().all(|v| v.is_finite()) {
        return Err(NonFiniteStart);
    }

    let memory = cfg.memory.max(1);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(memory);
    let mut d = vec![0.0; n];
    let mut alpha_buf = vec![0.0; memory];
    let mut iterations = 0;

    let termination = loop {
        if inf_norm(&g) < cfg.grad_tol * (1.0 + f.abs()) {
            break Termination::GradientTolerance;
        }
        if iterations >= cfg.max_iter {
            break Termination::MaxIterations;
        }

        // Two-loop recursion: d = -H g.
        d.iter_mut().zip(&g).for_each(|(di, gi)| *di = -gi);
        for (k, (s, y, rho)) in history.iter().enumerate().rev() {
            let a = rho * dot(s, &d);
            alpha_buf[k] = a;
            d.iter_mut().zip(y).for_each(|(di, yi)| *di -= a * yi);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|di| *di *= gamma);
        }
        for (k, (s, y, rho)) in history.iter().enumerate() {
            let b = rho * dot(y, &d);
            d.iter_mut().zip(s).for_each(|(di, si)| *di += (alpha_buf[k] - b) * si);
        }

        let mut dphi0 = dot(&g, &d);
        if !(dphi0 < 0.0) {
            history.clear();
            d.iter_mut().zip(&g).for_each(|(di, gi)| *di = -gi);
            dphi0 = dot(&g, &d);
        }
        let alpha0 = if history.is_empty() {
            (1.0 / dot(&g, &g).sqrt()).min(1.0)
        } else {
            1.0
        };

        let mut ev = Evaluator {
            func: &mut func,
            x: &x,
            d: &d,
            trial: vec![0.0; n],
            grad: vec![0.0; n],
        };
        let Some(step) = line_search(&mut ev, f, dphi0, alpha0, cfg) else {
            if history.is_empty() {
                break Termination::LineSearchFailed;
            }
            history.clear();
            continue;
        };
        let Evaluator { trial, grad, .. } = ev;

        let s: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = grad.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if history.len() == memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        x = trial;
        g = grad;
        f = step.f;
        iterations += 1;
    };

    Ok(LbfgsOutcome {
        x,
        f,
        iterations,
        termination,
    })
}
