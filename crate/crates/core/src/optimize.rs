//! Bounded derivative-free minimizers: Nelder-Mead, Powell and differential
//! evolution.
//!
//! All three share the same contract. Candidates are clamped into the box
//! before evaluation and the clamping distance is added as a penalty to the
//! value the optimizer steers by. The returned point is the best evaluated
//! one, the running best in the trace never increases, and a seeded run is
//! reproducible bit for bit.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Something to minimize. Closures `FnMut(&[f64]) -> f64` implement it.
pub trait Objective {
    fn evaluate(&mut self, x: &[f64]) -> f64;

    /// Evaluates several points; implementations may run them concurrently
    /// as long as results come back in input order.
    fn evaluate_batch(&mut self, xs: &[Vec<f64>]) -> Vec<f64> {
        xs.iter().map(|x| self.evaluate(x)).collect()
    }
}

impl<F: FnMut(&[f64]) -> f64> Objective for F {
    fn evaluate(&mut self, x: &[f64]) -> f64 {
        self(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::Invalid("bounds must be non-empty and of equal length".into()));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if !l.is_finite() || !u.is_finite() || l > u {
                return Err(Error::Invalid(format!("ill-formed bound [{l}, {u}]")));
            }
        }
        Ok(Bounds { lower, upper })
    }

    pub fn uniform(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Bounds::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    /// Clamped copy of `x` and the squared distance that was removed.
    pub fn clamp(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let mut excess = 0.0;
        let y = x
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let c = v.clamp(self.lower[i], self.upper[i]);
                excess += (v - c) * (v - c);
                c
            })
            .collect();
        (y, excess)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .enumerate()
            .all(|(i, &v)| v >= self.lower[i] && v <= self.upper[i])
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                if self.width(i) > 0.0 {
                    rng.random_range(self.lower[i]..=self.upper[i])
                } else {
                    self.lower[i]
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub params: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub best_params: Vec<f64>,
    pub best_value: f64,
    /// Every evaluation in call order.
    pub trace: Vec<Evaluation>,
}

impl OptimizeResult {
    pub fn n_evals(&self) -> usize {
        self.trace.len()
    }

    /// Running minimum of the trace values.
    pub fn running_best(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.trace
            .iter()
            .map(|e| {
                best = best.min(e.value);
                best
            })
            .collect()
    }
}

/// Which minimizer to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    NelderMead,
    #[default]
    Powell,
    DifferentialEvolution,
}

/// Settings shared by all three methods plus the method-specific knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSettings {
    pub max_evals: usize,
    pub seed: u64,
    /// Nelder-Mead initial simplex edge as a fraction of each bound width.
    pub simplex_scale: f64,
    /// Nelder-Mead stops (or restarts) when the simplex values spread less
    /// than this and the vertices sit within `xtol` of each other.
    pub ftol: f64,
    pub xtol: f64,
    /// Nelder-Mead restarts from the incumbent while budget remains.
    pub restarts: bool,
    /// Powell line-search tolerance as a fraction of the feasible segment.
    pub line_tol: f64,
    /// Powell visits coordinate directions in a seeded random order.
    pub shuffle_directions: bool,
    pub population: usize,
    /// Differential-evolution scale factor when `dither` is off.
    pub mutation: f64,
    pub dither: bool,
    pub crossover: f64,
    /// Differential evolution mutates around the best member instead of a
    /// random one.
    pub de_best_base: bool,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            max_evals: 1000,
            seed: 0,
            simplex_scale: 0.05,
            ftol: 1e-12,
            xtol: 1e-10,
            restarts: true,
            line_tol: 1e-3,
            shuffle_directions: true,
            population: 15,
            mutation: 0.4,
            dither: false,
            crossover: 0.9,
            de_best_base: true,
        }
    }
}

/// Runs `kind` from `x0` within `bounds`.
pub fn minimize<O: Objective>(
    kind: OptimizerKind,
    objective: &mut O,
    x0: &[f64],
    bounds: &Bounds,
    settings: &OptimizerSettings,
) -> Result<OptimizeResult> {
    match kind {
        OptimizerKind::NelderMead => nelder_mead(objective, x0, bounds, settings),
        OptimizerKind::Powell => powell(objective, x0, bounds, settings),
        OptimizerKind::DifferentialEvolution => {
            differential_evolution(objective, Some(x0), bounds, settings)
        }
    }
}

/// Bookkeeping wrapper: clamping, penalty, budget, trace, non-finite guard.
struct Tracker<'a, O: Objective> {
    objective: &'a mut O,
    bounds: &'a Bounds,
    max_evals: usize,
    trace: Vec<Evaluation>,
    non_finite: usize,
    best: Option<(Vec<f64>, f64)>,
    penalty_scale: f64,
}

impl<'a, O: Objective> Tracker<'a, O> {
    fn new(objective: &'a mut O, bounds: &'a Bounds, max_evals: usize) -> Result<Self> {
        if bounds.dim() == 0 {
            return Err(Error::Invalid("empty parameter space".into()));
        }
        if max_evals == 0 {
            return Err(Error::Budget("optimizer budget must be at least 1".into()));
        }
        Ok(Tracker {
            objective,
            bounds,
            max_evals,
            trace: Vec::new(),
            non_finite: 0,
            best: None,
            penalty_scale: 1.0,
        })
    }

    fn remaining(&self) -> usize {
        self.max_evals - self.trace.len()
    }

    fn exhausted(&self) -> bool {
        self.remaining() == 0
    }

    fn record(&mut self, x: Vec<f64>, raw: f64) -> f64 {
        let value = if raw.is_finite() {
            raw
        } else {
            self.non_finite += 1;
            f64::INFINITY
        };
        if value.is_finite() {
            self.penalty_scale = self.penalty_scale.max(value.abs());
        }
        if self.best.as_ref().is_none_or(|(_, b)| value < *b) {
            self.best = Some((x.clone(), value));
        }
        self.trace.push(Evaluation { params: x, value });
        value
    }

    fn check_health(&self) -> Result<()> {
        let n = self.trace.len();
        if n >= 4 && 2 * self.non_finite > n {
            return Err(Error::OptimizerAborted(format!(
                "objective was non-finite at {} of {} evaluations",
                self.non_finite, n
            )));
        }
        Ok(())
    }

    /// Evaluates `x` (clamped) and returns the penalized value; `None` once the
    /// budget is spent.
    fn eval(&mut self, x: &[f64]) -> Result<Option<f64>> {
        if self.exhausted() {
            return Ok(None);
        }
        let (y, excess) = self.bounds.clamp(x);
        let raw = self.objective.evaluate(&y);
        let value = self.record(y, raw);
        self.check_health()?;
        Ok(Some(value + self.penalty(excess)))
    }

    /// Evaluates as many of `xs` as the budget allows, in order.
    fn eval_batch(&mut self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        let take = xs.len().min(self.remaining());
        let clamped: Vec<(Vec<f64>, f64)> = xs[..take].iter().map(|x| self.bounds.clamp(x)).collect();
        let points: Vec<Vec<f64>> = clamped.iter().map(|(y, _)| y.clone()).collect();
        let raws = self.objective.evaluate_batch(&points);
        let mut out = Vec::with_capacity(take);
        for ((y, excess), raw) in clamped.into_iter().zip(raws) {
            let v = self.record(y, raw);
            out.push(v + self.penalty(excess));
        }
        self.check_health()?;
        Ok(out)
    }

    fn penalty(&self, excess: f64) -> f64 {
        if excess > 0.0 {
            self.penalty_scale * (1.0 + excess)
        } else {
            0.0
        }
    }

    fn finish(self) -> Result<OptimizeResult> {
        let (best_params, best_value) = self
            .best
            .ok_or_else(|| Error::OptimizerAborted("no evaluation performed".into()))?;
        if !best_value.is_finite() {
            return Err(Error::OptimizerAborted("objective never returned a finite value".into()));
        }
        Ok(OptimizeResult {
            best_params,
            best_value,
            trace: self.trace,
        })
    }
}

fn check_start(x0: &[f64], bounds: &Bounds) -> Result<Vec<f64>> {
    if x0.len() != bounds.dim() {
        return Err(Error::DimensionMismatch {
            expected: bounds.dim(),
            got: x0.len(),
        });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("starting point".into()));
    }
    Ok(bounds.clamp(x0).0)
}

/// Nelder-Mead simplex search with standard coefficients (1, 2, 1/2, 1/2).
pub fn nelder_mead<O: Objective>(
    objective: &mut O,
    x0: &[f64],
    bounds: &Bounds,
    settings: &OptimizerSettings,
) -> Result<OptimizeResult> {
    let start = check_start(x0, bounds)?;
    let n = bounds.dim();
    let mut t = Tracker::new(objective, bounds, settings.max_evals)?;
    let mut scale = settings.simplex_scale;
    let mut center = start;

    'restart: loop {
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        let Some(f0) = t.eval(&center)? else { break };
        simplex.push((center.clone(), f0));
        for i in 0..n {
            let mut v = center.clone();
            let mut step = scale * bounds.width(i);
            if step == 0.0 {
                step = scale.max(1e-3) * center[i].abs().max(1.0);
            }
            // Step inward when the vertex would leave the box.
            if v[i] + step > bounds.upper[i] {
                step = -step;
            }
            v[i] += step;
            let Some(f) = t.eval(&v)? else { break 'restart };
            simplex.push((v, f));
        }

        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let (best_f, worst_f) = (simplex[0].1, simplex[n].1);
            let spread_x = simplex[1..]
                .iter()
                .flat_map(|(v, _)| v.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
                .fold(0.0_f64, f64::max);
            if (worst_f - best_f).abs() <= settings.ftol && spread_x <= settings.xtol {
                if settings.restarts && !t.exhausted() {
                    center = simplex[0].0.clone();
                    scale = (scale * 0.5).max(1e-6);
                    continue 'restart;
                }
                break 'restart;
            }

            let centroid: Vec<f64> = (0..n)
                .map(|j| simplex[..n].iter().map(|(v, _)| v[j]).sum::<f64>() / n as f64)
                .collect();
            let worst = simplex[n].0.clone();
            let along = |coef: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&worst)
                    .map(|(c, w)| c + coef * (c - w))
                    .collect()
            };

            let xr = along(1.0);
            let Some(fr) = t.eval(&xr)? else { break 'restart };
            if fr < simplex[0].1 {
                let xe = along(2.0);
                let Some(fe) = t.eval(&xe)? else { break 'restart };
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < simplex[n].1 {
                    let xc = along(0.5);
                    let Some(fc) = t.eval(&xc)? else { break 'restart };
                    (xc, fc)
                } else {
                    let xc = along(-0.5);
                    let Some(fc) = t.eval(&xc)? else { break 'restart };
                    (xc, fc)
                };
                if fc < simplex[n].1.min(fr) {
                    simplex[n] = (xc, fc);
                } else {
                    let best = simplex[0].0.clone();
                    for k in 1..=n {
                        let v: Vec<f64> = simplex[k]
                            .0
                            .iter()
                            .zip(&best)
                            .map(|(x, b)| b + 0.5 * (x - b))
                            .collect();
                        let Some(f) = t.eval(&v)? else { break 'restart };
                        simplex[k] = (v, f);
                    }
                }
            }
        }
    }
    t.finish()
}

/// Powell's conjugate-direction method with bounded Brent line searches.
pub fn powell<O: Objective>(
    objective: &mut O,
    x0: &[f64],
    bounds: &Bounds,
    settings: &OptimizerSettings,
) -> Result<OptimizeResult> {
    let mut x = check_start(x0, bounds)?;
    let n = bounds.dim();
    let mut t = Tracker::new(objective, bounds, settings.max_evals)?;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut order: Vec<usize> = (0..n).collect();
    if settings.shuffle_directions {
        order.shuffle(&mut rng);
    }
    let mut directions: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| {
            let mut d = vec![0.0; n];
            d[i] = 1.0;
            d
        })
        .collect();

    let Some(mut fx) = t.eval(&x)? else {
        return t.finish();
    };
    'outer: while !t.exhausted() {
        let x_start = x.clone();
        let f_start = fx;
        let mut biggest_drop = 0.0;
        let mut biggest_idx = 0;
        for (k, d) in directions.iter().enumerate() {
            let Some((step, f_new)) = line_search(&mut t, &x, fx, d, settings.line_tol)? else {
                break 'outer;
            };
            if f_new < fx {
                for (xi, di) in x.iter_mut().zip(d) {
                    *xi += step * di;
                }
                if fx - f_new > biggest_drop {
                    biggest_drop = fx - f_new;
                    biggest_idx = k;
                }
                fx = f_new;
            }
        }
        let improvement = f_start - fx;
        if improvement.abs() <= settings.ftol * (1.0 + f_start.abs()) {
            break;
        }
        // Extrapolated direction replaces the one with the largest decrease.
        let new_dir: Vec<f64> = x.iter().zip(&x_start).map(|(a, b)| a - b).collect();
        let norm = new_dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            let unit: Vec<f64> = new_dir.iter().map(|v| v / norm).collect();
            let Some((step, f_new)) = line_search(&mut t, &x, fx, &unit, settings.line_tol)? else {
                break;
            };
            if f_new < fx {
                for (xi, di) in x.iter_mut().zip(&unit) {
                    *xi += step * di;
                }
                fx = f_new;
            }
            directions.remove(biggest_idx);
            directions.push(unit);
        }
    }
    t.finish()
}

/// Minimizes `f(x + s d)` over the feasible range of `s` with Brent's bounded
/// scalar method. Returns `None` when the budget runs out before any
/// evaluation along the line.
fn line_search<O: Objective>(
    t: &mut Tracker<'_, O>,
    x: &[f64],
    fx: f64,
    d: &[f64],
    rel_tol: f64,
) -> Result<Option<(f64, f64)>> {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..x.len() {
        if d[i] > 0.0 {
            lo = lo.max((t.bounds.lower[i] - x[i]) / d[i]);
            hi = hi.min((t.bounds.upper[i] - x[i]) / d[i]);
        } else if d[i] < 0.0 {
            lo = lo.max((t.bounds.upper[i] - x[i]) / d[i]);
            hi = hi.min((t.bounds.lower[i] - x[i]) / d[i]);
        }
    }
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Ok(Some((0.0, fx)));
    }
    let point = |s: f64| -> Vec<f64> { x.iter().zip(d).map(|(a, b)| a + s * b).collect() };
    let tol = rel_tol * (hi - lo);
    let f = |s: f64, t: &mut Tracker<'_, O>| -> Result<Option<f64>> { t.eval(&point(s)) };
    let r = brent_bounded(lo, hi, tol, &mut |s| f(s, t))?;
    Ok(r.map(|(s, fs)| if fs < fx { (s, fs) } else { (0.0, fx) }))
}

/// Brent's bounded minimizer (golden section with parabolic steps). The
/// callback returns `None` when evaluation must stop; the best point seen
/// so far is then returned.
fn brent_bounded<F>(a: f64, b: f64, tol: f64, f: &mut F) -> Result<Option<(f64, f64)>>
where
    F: FnMut(f64) -> Result<Option<f64>>,
{
    const GOLDEN: f64 = 0.381_966_011_250_105_1;
    let (mut a, mut b) = (a, b);
    let mut v = a + GOLDEN * (b - a);
    let mut w = v;
    let mut x = v;
    let mut e: f64 = 0.0;
    let mut d: f64 = 0.0;
    let Some(fx0) = f(x)? else { return Ok(None) };
    let (mut fx, mut fv, mut fw) = (fx0, fx0, fx0);
    let tol = tol.max(1e-12);
    loop {
        let xm = 0.5 * (a + b);
        let tol1 = 1e-10 * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let Some(fu) = f(u)? else { break };
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Ok(Some((x, fx)))
}

/// Differential evolution with binomial crossover. The base vector is the
/// current best member (`best/1/bin`) or a random one (`rand/1/bin`); the
/// scale factor is redrawn from `[0.5, 1)` every generation when `dither` is
/// set. When `x0` is given it replaces the first random member of the
/// initial population.
pub fn differential_evolution<O: Objective>(
    objective: &mut O,
    x0: Option<&[f64]>,
    bounds: &Bounds,
    settings: &OptimizerSettings,
) -> Result<OptimizeResult> {
    let n = bounds.dim();
    let np = settings.population.max(4);
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut pop: Vec<Vec<f64>> = (0..np).map(|_| bounds.sample(&mut rng)).collect();
    if let Some(x0) = x0 {
        pop[0] = check_start(x0, bounds)?;
    }
    let mut t = Tracker::new(objective, bounds, settings.max_evals)?;
    let mut fit = t.eval_batch(&pop)?;
    pop.truncate(fit.len());
    if pop.len() < np {
        return t.finish();
    }

    while !t.exhausted() {
        let f = if settings.dither {
            rng.random_range(0.5..1.0)
        } else {
            settings.mutation
        };
        let best = (0..np).min_by(|&a, &b| fit[a].total_cmp(&fit[b])).unwrap_or(0);
        let trials: Vec<Vec<f64>> = (0..np)
            .map(|i| {
                let mut pick = || loop {
                    let k = rng.random_range(0..np);
                    if k != i {
                        break k;
                    }
                };
                let a = if settings.de_best_base { best } else { pick() };
                let (mut b, mut c) = (pick(), pick());
                while b == a {
                    b = pick();
                }
                while c == a || c == b {
                    c = pick();
                }
                let forced = rng.random_range(0..n);
                (0..n)
                    .map(|j| {
                        if j == forced || rng.random::<f64>() < settings.crossover {
                            let v = pop[a][j] + f * (pop[b][j] - pop[c][j]);
                            v.clamp(bounds.lower[j], bounds.upper[j])
                        } else {
                            pop[i][j]
                        }
                    })
                    .collect()
            })
            .collect();
        let values = t.eval_batch(&trials)?;
        for (i, v) in values.into_iter().enumerate() {
            if v <= fit[i] {
                pop[i] = trials[i].clone();
                fit[i] = v;
            }
        }
    }
    t.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    fn settings(max_evals: usize) -> OptimizerSettings {
        OptimizerSettings {
            max_evals,
            seed: 7,
            line_tol: 1e-6,
            ..Default::default()
        }
    }

    #[test]
    fn sphere_all_methods() {
        let b = Bounds::uniform(2, -5.0, 5.0).unwrap();
        for kind in [
            OptimizerKind::NelderMead,
            OptimizerKind::Powell,
            OptimizerKind::DifferentialEvolution,
        ] {
            let mut f = |x: &[f64]| sphere(x);
            let r = minimize(kind, &mut f, &[3.0, -2.0], &b, &settings(200)).unwrap();
            assert!(r.best_value < 1e-4, "{kind:?}: {}", r.best_value);
            assert!(r.n_evals() <= 200);
        }
    }

    #[test]
    fn rosenbrock_simplex_and_powell() {
        let b = Bounds::uniform(2, -2.0, 2.0).unwrap();
        for kind in [OptimizerKind::NelderMead, OptimizerKind::Powell] {
            let mut f = |x: &[f64]| rosenbrock(x);
            let r = minimize(kind, &mut f, &[-1.2, 1.0], &b, &settings(2000)).unwrap();
            assert!(r.best_value < 1e-2, "{kind:?}: {}", r.best_value);
        }
    }

    #[test]
    fn deterministic_traces() {
        let b = Bounds::uniform(3, -1.0, 2.0).unwrap();
        for kind in [
            OptimizerKind::NelderMead,
            OptimizerKind::Powell,
            OptimizerKind::DifferentialEvolution,
        ] {
            let run = || {
                let mut f = |x: &[f64]| rosenbrock(x) + x[2].sin();
                minimize(kind, &mut f, &[0.5, 0.5, 0.5], &b, &settings(150)).unwrap()
            };
            assert_eq!(run(), run());
        }
    }

    #[test]
    fn never_leaves_bounds() {
        let b = Bounds::new(vec![1.0, -1.0], vec![2.0, 0.0]).unwrap();
        for kind in [
            OptimizerKind::NelderMead,
            OptimizerKind::Powell,
            OptimizerKind::DifferentialEvolution,
        ] {
            let mut f = |x: &[f64]| sphere(x);
            let r = minimize(kind, &mut f, &[1.9, -0.1], &b, &settings(300)).unwrap();
            assert!(r.trace.iter().all(|e| b.contains(&e.params)));
            assert!((r.best_params[0] - 1.0).abs() < 1e-3);
            let rb = r.running_best();
            assert!(rb.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn aborts_on_mostly_nan() {
        let b = Bounds::uniform(1, -1.0, 1.0).unwrap();
        let mut f = |x: &[f64]| if x[0] > -0.9 { f64::NAN } else { x[0] };
        let r = nelder_mead(&mut f, &[0.0], &b, &settings(50));
        assert!(matches!(r, Err(Error::OptimizerAborted(_))));
    }

    #[test]
    fn budget_of_one() {
        let b = Bounds::uniform(2, -1.0, 1.0).unwrap();
        let mut f = |x: &[f64]| sphere(x);
        let r = powell(&mut f, &[0.5, 0.5], &b, &settings(1)).unwrap();
        assert_eq!(r.n_evals(), 1);
        assert_eq!(r.best_params, vec![0.5, 0.5]);
        assert!(nelder_mead(&mut f, &[0.5, 0.5], &b, &settings(0)).is_err());
    }

    #[test]
    fn bad_bounds() {
        assert!(Bounds::new(vec![1.0], vec![0.0]).is_err());
        assert!(Bounds::new(vec![f64::NEG_INFINITY], vec![0.0]).is_err());
    }
}
