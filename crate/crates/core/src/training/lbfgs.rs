//! Limited-memory BFGS with a strong-Wolfe line search.
//!
//! Search directions come from the standard two-loop recursion over the
//! last `history` curvature pairs, scaled by `sᵀy / yᵀy`. The line search
//! brackets and then zooms with safeguarded cubic interpolation. Every
//! accepted step satisfies sufficient decrease, so the returned objective
//! never exceeds the starting one.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsConfig {
    pub history: usize,
    pub max_iterations: usize,
    /// Stop when `max |∇J| <` this.
    pub gradient_tolerance: f64,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    /// Objective evaluations allowed per line search.
    pub max_line_search: usize,
    /// Stop when a step changes the objective or the iterate by less than this.
    pub tolerance_change: f64,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        LbfgsConfig {
            history: 5,
            max_iterations: 10,
            gradient_tolerance: 1e-6,
            c1: 1e-4,
            c2: 0.9,
            max_line_search: 25,
            tolerance_change: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    MaxIterations,
    GradientTolerance,
    /// No acceptable step along the current direction.
    LineSearchFailed,
    /// Progress below `tolerance_change`.
    Stalled,
    /// The objective returned a non-finite gradient; the last good iterate
    /// is returned.
    NonFinite,
}

#[derive(Debug, Clone)]
pub struct LbfgsReport {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct Point {
    t: f64,
    f: f64,
    g: Vec<f64>,
    slope: f64,
}

enum Search {
    Accepted(Point),
    Failed { last_step: f64 },
    NonFinite,
}

/// Minimizer of the cubic interpolating `(x1, f1, g1)` and `(x2, f2, g2)`,
/// clamped to `bounds`. Falls back to bisection when the cubic has no real
/// minimizer or the data are not finite.
fn cubic_interpolate(x1: f64, f1: f64, g1: f64, x2: f64, f2: f64, g2: f64, bounds: (f64, f64)) -> f64 {
    let (lo, hi) = bounds;
    let mid = (lo + hi) / 2.0;
    if ![x1, f1, g1, x2, f2, g2].iter().all(|v| v.is_finite()) || x1 == x2 {
        return mid;
    }
    let d1 = g1 + g2 - 3.0 * (f1 - f2) / (x1 - x2);
    let d2_sq = d1 * d1 - g1 * g2;
    if d2_sq < 0.0 {
        return mid;
    }
    let d2 = d2_sq.sqrt();
    let t = if x1 <= x2 {
        x2 - (x2 - x1) * ((g2 + d2 - d1) / (g2 - g1 + 2.0 * d2))
    } else {
        x1 - (x1 - x2) * ((g1 + d2 - d1) / (g1 - g2 + 2.0 * d2))
    };
    if t.is_finite() {
        t.clamp(lo, hi)
    } else {
        mid
    }
}

struct LineSearch<'a, F> {
    f: &'a mut F,
    x: &'a [f64],
    d: &'a [f64],
    f0: f64,
    slope0: f64,
    cfg: &'a LbfgsConfig,
    trial: Vec<f64>,
    evaluations: usize,
}

impl<F: FnMut(&[f64], &mut [f64]) -> f64> LineSearch<'_, F> {
    /// Evaluates at step `t`; `None` if the gradient is not finite.
    fn eval(&mut self, t: f64) -> Option<Point> {
        for ((xt, x), d) in self.trial.iter_mut().zip(self.x).zip(self.d) {
            *xt = x + t * d;
        }
        let mut g = vec![0.0; self.x.len()];
        let f = (self.f)(&self.trial, &mut g);
        self.evaluations += 1;
        if !f.is_finite() {
            // treated as an overly long step
            return Some(Point {
                t,
                f: f64::INFINITY,
                g,
                slope: f64::NAN,
            });
        }
        if !g.iter().all(|v| v.is_finite()) {
            return None;
        }
        let slope = dot(&g, self.d);
        Some(Point { t, f, g, slope })
    }

    fn armijo(&self, p: &Point) -> bool {
        p.f <= self.f0 + self.cfg.c1 * p.t * self.slope0
    }

    fn curvature(&self, p: &Point) -> bool {
        p.slope.abs() <= -self.cfg.c2 * self.slope0
    }

    fn run(mut self, t0: f64) -> (Search, usize) {
        let result = self.search(t0);
        (result, self.evaluations)
    }

    fn search(&mut self, t0: f64) -> Search {
        let mut prev = Point {
            t: 0.0,
            f: self.f0,
            g: Vec::new(),
            slope: self.slope0,
        };
        let mut t = t0;
        let d_norm = max_abs(self.d);
        for i in 0..self.cfg.max_line_search {
            let Some(p) = self.eval(t) else {
                return Search::NonFinite;
            };
            if !self.armijo(&p) || (i > 0 && p.f >= prev.f) {
                return self.zoom(prev, p, d_norm);
            }
            if self.curvature(&p) {
                return Search::Accepted(p);
            }
            if p.slope >= 0.0 {
                return self.zoom(p, prev, d_norm);
            }
            let lo = p.t + 0.01 * (p.t - prev.t);
            let hi = p.t * 10.0;
            t = cubic_interpolate(prev.t, prev.f, prev.slope, p.t, p.f, p.slope, (lo, hi));
            prev = p;
        }
        // Out of evaluations while still extrapolating: the last point
        // satisfies sufficient decrease.
        if prev.t > 0.0 {
            Search::Accepted(prev)
        } else {
            Search::Failed { last_step: t }
        }
    }

    /// `lo` satisfies sufficient decrease and has the lower value; `hi`
    /// bounds the other end of the bracket.
    fn zoom(&mut self, mut lo: Point, mut hi: Point, d_norm: f64) -> Search {
        let mut insufficient_progress = false;
        while self.evaluations < self.cfg.max_line_search {
            let (a, b) = (lo.t.min(hi.t), lo.t.max(hi.t));
            if (b - a) * d_norm < self.cfg.tolerance_change {
                break;
            }
            let mut t = if hi.f.is_finite() {
                cubic_interpolate(lo.t, lo.f, lo.slope, hi.t, hi.f, hi.slope, (a, b))
            } else {
                (a + b) / 2.0
            };
            let eps = 0.1 * (b - a);
            if (b - t).min(t - a) < eps {
                if insufficient_progress || t >= b || t <= a {
                    t = if (t - b).abs() < (t - a).abs() {
                        b - eps
                    } else {
                        a + eps
                    };
                    insufficient_progress = false;
                } else {
                    insufficient_progress = true;
                }
            } else {
                insufficient_progress = false;
            }

            let Some(p) = self.eval(t) else {
                return Search::NonFinite;
            };
            if !self.armijo(&p) || p.f >= lo.f {
                hi = p;
            } else {
                if self.curvature(&p) {
                    return Search::Accepted(p);
                }
                if p.slope * (hi.t - lo.t) >= 0.0 {
                    hi = lo;
                }
                lo = p;
            }
        }
        if lo.t > 0.0 && lo.f < self.f0 {
            Search::Accepted(lo)
        } else {
            Search::Failed { last_step: hi.t }
        }
    }
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// `−H·g` by the two-loop recursion.
fn direction(history: &VecDeque<Pair>, g: &[f64]) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alpha = vec![0.0; history.len()];
    for (i, p) in history.iter().enumerate().rev() {
        alpha[i] = p.rho * dot(&p.s, &q);
        for (qj, yj) in q.iter_mut().zip(&p.y) {
            *qj -= alpha[i] * yj;
        }
    }
    if let Some(last) = history.back() {
        let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
        for qj in &mut q {
            *qj *= gamma;
        }
    }
    for (i, p) in history.iter().enumerate() {
        let beta = p.rho * dot(&p.y, &q);
        for (qj, sj) in q.iter_mut().zip(&p.s) {
            *qj += (alpha[i] - beta) * sj;
        }
    }
    for qj in &mut q {
        *qj = -*qj;
    }
    q
}

/// Minimizes `objective` from `x0`.
///
/// `objective(x, grad)` returns `J(x)` and writes `∇J(x)` into `grad`.
pub fn lbfgs_minimize<F>(mut objective: F, x0: Vec<f64>, cfg: &LbfgsConfig) -> Result<LbfgsReport>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let mut x = x0;
    let mut g = vec![0.0; x.len()];
    let mut f = objective(&x, &mut g);
    let mut evaluations = 1;
    if !f.is_finite() || !g.iter().all(|v| v.is_finite()) {
        return Err(Error::Numerical {
            group: "objective at starting point".into(),
        });
    }
    let report = |x, f, g, iterations, evaluations, termination| LbfgsReport {
        x,
        value: f,
        gradient: g,
        iterations,
        evaluations,
        termination,
    };
    if max_abs(&g) < cfg.gradient_tolerance {
        return Ok(report(x, f, g, 0, evaluations, Termination::GradientTolerance));
    }

    let mut history: VecDeque<Pair> = VecDeque::with_capacity(cfg.history);
    for iter in 0..cfg.max_iterations {
        let mut d = direction(&history, &g);
        let mut slope = dot(&g, &d);
        if slope.is_nan() || slope >= 0.0 {
            history.clear();
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        let t0 = if history.is_empty() {
            (1.0 / g.iter().map(|v| v.abs()).sum::<f64>()).min(1.0)
        } else {
            1.0
        };

        let search = LineSearch {
            f: &mut objective,
            x: &x,
            d: &d,
            f0: f,
            slope0: slope,
            cfg,
            trial: vec![0.0; x.len()],
            evaluations: 0,
        };
        let (outcome, used) = search.run(t0);
        evaluations += used;
        let point = match outcome {
            Search::Accepted(p) => p,
            Search::Failed { last_step } if iter == 0 => {
                return Err(Error::LineSearch {
                    f0: f,
                    slope,
                    step: last_step,
                })
            }
            Search::Failed { .. } => {
                return Ok(report(x, f, g, iter, evaluations, Termination::LineSearchFailed));
            }
            Search::NonFinite => {
                return Ok(report(x, f, g, iter, evaluations, Termination::NonFinite));
            }
        };

        let s: Vec<f64> = d.iter().map(|di| point.t * di).collect();
        let y: Vec<f64> = point.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 {
            if history.len() == cfg.history.max(1) {
                history.pop_front();
            }
            history.push_back(Pair {
                s: s.clone(),
                y,
                rho: 1.0 / sy,
            });
        }
        for (xi, si) in x.iter_mut().zip(&s) {
            *xi += si;
        }
        let f_prev = f;
        f = point.f;
        g = point.g;

        if max_abs(&g) < cfg.gradient_tolerance {
            return Ok(report(x, f, g, iter + 1, evaluations, Termination::GradientTolerance));
        }
        if (f_prev - f).abs() < cfg.tolerance_change || max_abs(&s) < cfg.tolerance_change {
            return Ok(report(x, f, g, iter + 1, evaluations, Termination::Stalled));
        }
    }
    let iters = cfg.max_iterations;
    Ok(report(x, f, g, iters, evaluations, Termination::MaxIterations))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(c: &[f64]) -> impl FnMut(&[f64], &mut [f64]) -> f64 + '_ {
        move |x, g| {
            let mut f = 0.0;
            for ((gi, xi), ci) in g.iter_mut().zip(x).zip(c) {
                *gi = 2.0 * (xi - ci);
                f += (xi - ci) * (xi - ci);
            }
            f
        }
    }

    #[test]
    fn quadratic_converges_fast() {
        let c = [1.0, -2.0, 3.5, 0.25, -7.0];
        let cfg = LbfgsConfig {
            max_iterations: c.len() + 5,
            ..LbfgsConfig::default()
        };
        let r = lbfgs_minimize(quadratic(&c), vec![10.0, 10.0, -3.0, 0.0, 4.0], &cfg).unwrap();
        assert!(r.iterations <= c.len() + 5);
        for (xi, ci) in r.x.iter().zip(&c) {
            assert!((xi - ci).abs() < 1e-8, "{:?}", r.x);
        }
    }

    #[test]
    fn already_stationary() {
        let c = [0.5, 0.5];
        let r = lbfgs_minimize(quadratic(&c), c.to_vec(), &LbfgsConfig::default()).unwrap();
        assert_eq!(r.evaluations, 1);
        assert_eq!(r.x, c);
        assert_eq!(r.termination, Termination::GradientTolerance);
    }

    #[test]
    fn rosenbrock_reaches_minimum() {
        let f = |x: &[f64], g: &mut [f64]| {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        };
        let cfg = LbfgsConfig {
            max_iterations: 200,
            ..LbfgsConfig::default()
        };
        let r = lbfgs_minimize(f, vec![-1.2, 1.0], &cfg).unwrap();
        assert!(
            (r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6,
            "{:?} {:?}",
            r.x,
            r.termination
        );
    }

    #[test]
    fn never_increases() {
        let f = |x: &[f64], g: &mut [f64]| {
            g[0] = x[0].cos();
            x[0].sin()
        };
        let r = lbfgs_minimize(f, vec![0.3], &LbfgsConfig::default()).unwrap();
        assert!(r.value <= 0.3f64.sin());
    }

    #[test]
    fn non_finite_start_is_an_error() {
        let f = |_: &[f64], g: &mut [f64]| {
            g[0] = 1.0;
            f64::NAN
        };
        assert!(matches!(
            lbfgs_minimize(f, vec![0.0], &LbfgsConfig::default()),
            Err(Error::Numerical { .. })
        ));
    }

    #[test]
    fn first_iteration_failure_reports() {
        // Gradient points the wrong way: no step along −g decreases f.
        let f = |x: &[f64], g: &mut [f64]| {
            g[0] = -1.0;
            x[0] * x[0] + 1.0 + x[0].abs()
        };
        let err = lbfgs_minimize(f, vec![0.0], &LbfgsConfig::default()).unwrap_err();
        assert!(matches!(err, Error::LineSearch { .. }), "{err}");
    }

    #[test]
    fn non_finite_gradient_returns_last_good() {
        let f = |x: &[f64], g: &mut [f64]| {
            g[0] = if x[0] == 0.0 { -1.0 } else { f64::NAN };
            -x[0]
        };
        let r = lbfgs_minimize(f, vec![0.0], &LbfgsConfig::default()).unwrap();
        assert_eq!(r.termination, Termination::NonFinite);
        assert_eq!(r.x, vec![0.0]);
    }
}
