//! Dense BFGS with a strong-Wolfe line search.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{dot, max_abs, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BfgsOptions {
    /// Stop when `|g|∞ ≤ gtol`.
    pub gtol: f64,
    pub max_iters: usize,
    pub c1: f64,
    pub c2: f64,
    /// Objective evaluations allowed per line search.
    pub max_line_evals: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            gtol: 1e-12,
            max_iters: 200,
            c1: 1e-4,
            c2: 0.9,
            max_line_evals: 40,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// `|g|∞ ≤ gtol`.
    GradientTolerance,
    /// No step along the search direction lowers the objective; the gradient
    /// is dominated by evaluation noise.
    LineSearchStalled,
    /// `max_iters` reached.
    MaxIterations,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub g: Vec<f64>,
    pub iterations: usize,
    /// Objective-and-gradient evaluations.
    pub n_calls: usize,
    pub termination: Termination,
}

struct Point {
    alpha: f64,
    x: Vec<f64>,
    f: f64,
    g: Vec<f64>,
    /// Directional derivative along the search direction.
    d: f64,
}

struct Counter<F> {
    f: F,
    calls: usize,
}

impl<F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>> Counter<F> {
    fn eval(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.calls += 1;
        (self.f)(x)
    }

    /// Evaluates `x + α p`. Evaluation failures (e.g. a step into a singular
    /// configuration) read as an infinitely bad point so the search backs off.
    fn at(&mut self, x: &[f64], p: &[f64], alpha: f64) -> Point {
        let xa: Vec<f64> = x.iter().zip(p).map(|(a, b)| a + alpha * b).collect();
        match self.eval(&xa) {
            Ok((f, g)) if f.is_finite() && g.iter().all(|v| v.is_finite()) => {
                let d = dot(&g, p);
                Point {
                    alpha,
                    x: xa,
                    f,
                    g,
                    d,
                }
            }
            _ => Point {
                alpha,
                x: xa,
                f: f64::INFINITY,
                g: Vec::new(),
                d: f64::NAN,
            },
        }
    }
}

/// Minimizer of the cubic through `(a, fa, da)` and `(b, fb, db)`, kept away
/// from the interval ends; bisection when the cubic is unusable.
fn cubic_step(a: &Point, b: &Point) -> f64 {
    let (lo, hi) = (a.alpha.min(b.alpha), a.alpha.max(b.alpha));
    let width = hi - lo;
    let mid = 0.5 * (lo + hi);
    if !(a.f.is_finite() && b.f.is_finite() && a.d.is_finite() && b.d.is_finite()) {
        return mid;
    }
    let d1 = a.d + b.d - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    let disc = d1 * d1 - a.d * b.d;
    if disc < 0.0 {
        return mid;
    }
    let d2 = (b.alpha - a.alpha).signum() * disc.sqrt();
    let denom = b.d - a.d + 2.0 * d2;
    if denom == 0.0 {
        return mid;
    }
    let t = b.alpha - (b.alpha - a.alpha) * (b.d + d2 - d1) / denom;
    if t.is_finite() && t > lo + 0.1 * width && t < hi - 0.1 * width {
        t
    } else {
        mid
    }
}

enum Search {
    Wolfe(Point),
    /// Sufficient decrease without the curvature condition.
    Armijo(Point),
    Failed,
}

fn line_search<F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>>(
    obj: &mut Counter<F>,
    x: &[f64],
    f0: f64,
    p: &[f64],
    d0: f64,
    alpha1: f64,
    opts: &BfgsOptions,
) -> Search {
    // strict decrease too: near the noise floor `c1·α·d0` can be below one ulp of f0
    let armijo = |pt: &Point| pt.f <= f0 + opts.c1 * pt.alpha * d0 && pt.f < f0;
    let curvature = |pt: &Point| pt.d.abs() <= -opts.c2 * d0;
    let mut best: Option<Point> = None;
    let keep = |pt: &Point, best: &mut Option<Point>| {
        if armijo(pt) && best.as_ref().is_none_or(|b| pt.f < b.f) {
            *best = Some(Point {
                alpha: pt.alpha,
                x: pt.x.clone(),
                f: pt.f,
                g: pt.g.clone(),
                d: pt.d,
            });
        }
    };

    let mut evals = 0;
    let mut prev = Point {
        alpha: 0.0,
        x: x.to_vec(),
        f: f0,
        g: Vec::new(),
        d: d0,
    };
    let mut alpha = alpha1;
    let (mut lo, mut hi);
    loop {
        let cur = obj.at(x, p, alpha);
        evals += 1;
        keep(&cur, &mut best);
        if !armijo(&cur) || (evals > 1 && cur.f >= prev.f) {
            lo = prev;
            hi = cur;
            break;
        }
        if curvature(&cur) {
            return Search::Wolfe(cur);
        }
        if cur.d >= 0.0 {
            lo = cur;
            hi = prev;
            break;
        }
        if evals >= opts.max_line_evals {
            return best.map_or(Search::Failed, Search::Armijo);
        }
        alpha *= 2.0;
        prev = cur;
    }

    // zoom: `lo` satisfies sufficient decrease and has the lowest value so far
    while evals < opts.max_line_evals {
        if (hi.alpha - lo.alpha).abs() <= 1e-16 * lo.alpha.abs().max(1e-300) {
            break;
        }
        let a = cubic_step(&lo, &hi);
        let cur = obj.at(x, p, a);
        evals += 1;
        keep(&cur, &mut best);
        if !armijo(&cur) || cur.f >= lo.f {
            hi = cur;
        } else {
            if curvature(&cur) {
                return Search::Wolfe(cur);
            }
            if cur.d * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }
    best.map_or(Search::Failed, Search::Armijo)
}

/// Minimizes `f`, which returns the value and gradient at a point.
///
/// The starting point must evaluate successfully; later evaluation errors are
/// treated as rejected trial steps.
pub fn minimize<F>(f: F, x0: &[f64], opts: &BfgsOptions) -> Result<BfgsOutcome>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let n = x0.len();
    let mut obj = Counter { f, calls: 0 };
    let mut x = x0.to_vec();
    let (mut fx, mut g) = obj.eval(&x)?;
    let mut h = Matrix::identity(n);
    // a guess of the previous value sets the first trial step
    let mut f_prev = fx + 0.5 * g.iter().map(|v| v * v).sum::<f64>().sqrt();

    let done = |termination, x, f, g, iterations, calls| BfgsOutcome {
        x,
        f,
        g,
        iterations,
        n_calls: calls,
        termination,
    };

    for iter in 0..opts.max_iters {
        if max_abs(&g) <= opts.gtol {
            return Ok(done(
                Termination::GradientTolerance,
                x,
                fx,
                g,
                iter,
                obj.calls,
            ));
        }
        let mut p: Vec<f64> = h.matvec(&g).iter().map(|v| -v).collect();
        let mut d0 = dot(&g, &p);
        // not a descent direction, or NaN
        if d0.is_nan() || d0 >= 0.0 {
            h = Matrix::identity(n);
            p = g.iter().map(|v| -v).collect();
            d0 = dot(&g, &p);
        }
        let alpha1 = trial_step(fx, f_prev, d0);

        let step = match line_search(&mut obj, &x, fx, &p, d0, alpha1, opts) {
            Search::Wolfe(pt) | Search::Armijo(pt) => pt,
            Search::Failed => {
                return Ok(done(
                    Termination::LineSearchStalled,
                    x,
                    fx,
                    g,
                    iter,
                    obj.calls,
                ));
            }
        };

        let s: Vec<f64> = step.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = step.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&yv, &yv).sqrt() && sy > 0.0 {
            bfgs_update(&mut h, &s, &yv, 1.0 / sy);
        }
        f_prev = fx;
        x = step.x;
        fx = step.f;
        g = step.g;
    }
    let termination = if max_abs(&g) <= opts.gtol {
        Termination::GradientTolerance
    } else {
        Termination::MaxIterations
    };
    Ok(done(termination, x, fx, g, opts.max_iters, obj.calls))
}

/// Quadratic-model guess from the last decrease, capped at the full step.
fn trial_step(f: f64, f_prev: f64, d0: f64) -> f64 {
    let a = 1.01 * 2.0 * (f - f_prev) / d0;
    if a > 0.0 && a.is_finite() {
        a.clamp(1e-10, 1.0)
    } else {
        1.0
    }
}

/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ`.
fn bfgs_update(h: &mut Matrix, s: &[f64], y: &[f64], rho: f64) {
    let n = s.len();
    let hy = h.matvec(y);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] +=
                -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}
