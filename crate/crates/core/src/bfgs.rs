//! Dense BFGS with a strong Wolfe line search (cubic interpolation zoom).
//!
//! The objective closure returns `None` for points outside its domain; the
//! line search treats those as infinitely bad and backtracks.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BfgsOptions {
    pub max_iters: usize,
    /// Stop once `||g||_2` is at most this.
    pub grad_tol: f64,
    pub c1: f64,
    pub c2: f64,
    pub max_line_search: usize,
    /// Updates with `y's` at or below this are skipped.
    pub curvature_eps: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self { max_iters: 1000, grad_tol: 1e-6, c1: 1e-4, c2: 0.9, max_line_search: 40, curvature_eps: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfgsStatus {
    Converged,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub struct BfgsResult {
    pub x: Array1<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub status: BfgsStatus,
    /// Objective after each accepted step, starting with `f(x0)`.
    pub history: Vec<f64>,
    pub skipped_updates: usize,
}

#[derive(Clone)]
struct Point {
    alpha: f64,
    f: f64,
    slope: f64,
    x: Array1<f64>,
    g: Array1<f64>,
}

struct LineSearch<'a, F> {
    objective: &'a mut F,
    x: &'a Array1<f64>,
    dir: &'a Array1<f64>,
    f0: f64,
    slope0: f64,
    c1: f64,
    c2: f64,
    budget: usize,
}

impl<F> LineSearch<'_, F>
where
    F: FnMut(&Array1<f64>) -> Option<(f64, Array1<f64>)>,
{
    fn eval(&mut self, alpha: f64) -> Option<Point> {
        if self.budget == 0 {
            return None;
        }
        self.budget -= 1;
        let x = self.x + &(self.dir * alpha);
        let (f, g) = (self.objective)(&x)?;
        if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some(Point { alpha, f, slope: g.dot(self.dir), x, g })
    }

    fn armijo(&self, p: &Point) -> bool {
        p.f <= self.f0 + self.c1 * p.alpha * self.slope0
    }

    fn curvature(&self, p: &Point) -> bool {
        p.slope.abs() <= -self.c2 * self.slope0
    }

    /// Returns the accepted point, or the best Armijo point found if the
    /// search ran out of budget (flagged with `false`).
    fn run(&mut self, alpha0: f64) -> Option<(Point, bool)> {
        let start = Point { alpha: 0.0, f: self.f0, slope: self.slope0, x: self.x.clone(), g: Array1::zeros(0) };
        let mut prev = start.clone();
        let mut alpha = alpha0;
        for i in 0.. {
            let Some(cur) = self.eval(alpha) else {
                if self.budget == 0 {
                    return (prev.alpha > 0.0).then_some((prev, false));
                }
                // outside the domain: treat as a failed sufficient decrease
                return self.zoom(prev, None, alpha);
            };
            if !self.armijo(&cur) || (i > 0 && cur.f >= prev.f) {
                let hi_alpha = cur.alpha;
                return self.zoom(prev, Some(cur), hi_alpha);
            }
            if self.curvature(&cur) {
                return Some((cur, true));
            }
            if cur.slope >= 0.0 {
                let lo = cur.clone();
                let a = prev.alpha;
                return self.zoom(lo, Some(prev), a);
            }
            prev = cur;
            alpha *= 2.0;
            if self.budget == 0 {
                return Some((prev, false));
            }
        }
        unreachable!()
    }

    fn zoom(&mut self, mut lo: Point, mut hi: Option<Point>, mut hi_alpha: f64) -> Option<(Point, bool)> {
        while self.budget > 0 {
            let (a, b) = (lo.alpha, hi_alpha);
            let width = (b - a).abs();
            if width <= 1e-16 * a.abs().max(1.0) {
                break;
            }
            let trial = match &hi {
                Some(h) => cubic_min(&lo, h),
                None => None,
            }
            .filter(|t| {
                let (l, r) = (a.min(b), a.max(b));
                *t > l + 0.1 * width && *t < r - 0.1 * width
            })
            .unwrap_or(0.5 * (a + b));
            match self.eval(trial) {
                None => {
                    hi = None;
                    hi_alpha = trial;
                }
                Some(p) => {
                    if !self.armijo(&p) || p.f >= lo.f {
                        hi_alpha = p.alpha;
                        hi = Some(p);
                    } else {
                        if self.curvature(&p) {
                            return Some((p, true));
                        }
                        if p.slope * (hi_alpha - lo.alpha) >= 0.0 {
                            hi_alpha = lo.alpha;
                            hi = Some(lo.clone());
                        }
                        lo = p;
                    }
                }
            }
        }
        (lo.alpha > 0.0).then_some((lo, false))
    }
}

/// Minimizer of the cubic matching value and slope at both ends.
fn cubic_min(a: &Point, b: &Point) -> Option<f64> {
    let d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    let disc = d1 * d1 - a.slope * b.slope;
    if disc < 0.0 {
        return None;
    }
    let d2 = (b.alpha - a.alpha).signum() * disc.sqrt();
    let t = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / (b.slope - a.slope + 2.0 * d2);
    t.is_finite().then_some(t)
}

/// Minimizes `objective` from `x0`. The returned point is the best iterate,
/// so `f(x) <= f(x0)` always holds.
pub fn bfgs_minimize<F>(mut objective: F, x0: Array1<f64>, opts: &BfgsOptions) -> Result<BfgsResult>
where
    F: FnMut(&Array1<f64>) -> Option<(f64, Array1<f64>)>,
{
    let n = x0.len();
    let (mut f, mut g) = objective(&x0)
        .filter(|(f, g)| f.is_finite() && g.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::NonFinite("objective at the starting point".into()))?;
    let mut x = x0;
    let mut h = Array2::<f64>::eye(n);
    let mut history = vec![f];
    let mut status = BfgsStatus::MaxIterations;
    let mut iterations = 0;
    let mut skipped = 0;
    let mut scaled = false;
    let mut gnorm = g.dot(&g).sqrt();

    while iterations < opts.max_iters {
        if gnorm <= opts.grad_tol {
            status = BfgsStatus::Converged;
            break;
        }
        let mut dir = -h.dot(&g);
        let mut slope = g.dot(&dir);
        if !(slope < 0.0) {
            h = Array2::eye(n);
            scaled = false;
            dir = -g.clone();
            slope = -gnorm * gnorm;
        }
        let alpha0 = if scaled { 1.0 } else { (1.0 / dir.dot(&dir).sqrt()).min(1.0) };
        let mut ls = LineSearch {
            objective: &mut objective,
            x: &x,
            dir: &dir,
            f0: f,
            slope0: slope,
            c1: opts.c1,
            c2: opts.c2,
            budget: opts.max_line_search,
        };
        let Some((next, _)) = ls.run(alpha0) else {
            status = BfgsStatus::LineSearchFailed;
            break;
        };
        if !(next.f < f) {
            status = BfgsStatus::LineSearchFailed;
            break;
        }
        iterations += 1;
        let s = &next.x - &x;
        let y = &next.g - &g;
        let sy = s.dot(&y);
        if sy > opts.curvature_eps {
            if !scaled {
                h = Array2::eye(n) * (sy / y.dot(&y));
                scaled = true;
            }
            let hy = h.dot(&y);
            let yhy = y.dot(&hy);
            let rho = 1.0 / sy;
            let coef = (sy + yhy) * rho * rho;
            for i in 0..n {
                for j in 0..n {
                    h[[i, j]] += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        } else {
            skipped += 1;
        }
        x = next.x;
        f = next.f;
        g = next.g;
        gnorm = g.dot(&g).sqrt();
        history.push(f);
    }
    if status == BfgsStatus::MaxIterations && gnorm <= opts.grad_tol {
        status = BfgsStatus::Converged;
    }
    Ok(BfgsResult { x, f, grad_norm: gnorm, iterations, status, history, skipped_updates: skipped })
}
