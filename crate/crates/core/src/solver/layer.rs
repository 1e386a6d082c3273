//! Nested one-dimensional root finding for the parameters of one layer.
//!
//! The last scale is fixed to 1. Level `j` chooses `θ_{j-1}` so that
//! `g_{j-1} = x_{j-1}`, each trial solving all lower levels first; level 0
//! chooses the shift `τ` from the sum equation `Σ f g = Σ f x`. The remaining
//! equation holds once the others do. A damped Newton iteration on the
//! log-scales is tried first; the nested scheme is the fallback.

use std::cell::Cell;

use log::debug;

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Error, Result};
use crate::sets::TypeSet;
use crate::env::Environment;

use super::geval::{Layer, QmcPlan};

/// Bracket limits for `log2 θ` and for `τ`.
pub const LOG2_THETA_LIMIT: f64 = 30.0;
pub const TAU_LIMIT: f64 = (1u64 << 30) as f64;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Required accuracy of every equation at the solution.
    pub tol: f64,
    /// Accuracy each nested equation is solved to.
    pub inner_tol: f64,
    /// Budget of g evaluations per layer.
    pub max_evals: usize,
    pub points: usize,
    pub shifts: usize,
    pub seed: u64,
    /// Quantile faces per continuous die before face reduction.
    pub quantiles: usize,
    pub reduce: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 0.02,
            inner_tol: 2e-4,
            max_evals: 100_000,
            points: 1024,
            shifts: 8,
            seed: 0,
            quantiles: 200,
            reduce: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverReport {
    /// `|g_t − x(t)|` per layer type at the returned parameters.
    pub residuals: Vec<f64>,
    pub evaluations: usize,
    pub converged: bool,
}

impl SolverReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerSolution {
    /// Global type indices, in the order of `theta`.
    pub types: Vec<usize>,
    pub theta: Vec<f64>,
    pub tau: f64,
    pub report: SolverReport,
}

impl LayerSolution {
    /// Probability that the die of the `i`-th layer type rolls a positive face.
    pub fn positive_mass(&self, i: usize) -> f64 {
        (-self.tau / self.theta[i]).exp()
    }
}

#[derive(Clone, Debug)]
struct State {
    tau: f64,
    theta: Vec<f64>,
    g: Vec<f64>,
}

#[derive(Debug)]
struct BudgetExhausted;

#[derive(Debug)]
enum Failure {
    Budget,
    Other(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Other(e)
    }
}

impl From<BudgetExhausted> for Failure {
    fn from(_: BudgetExhausted) -> Self {
        Failure::Budget
    }
}

struct Nested<'a> {
    layer: &'a Layer<'a>,
    weights: Vec<f64>,
    x: Vec<f64>,
    target: f64,
    plan: &'a QmcPlan,
    options: &'a SolverOptions,
    evals: Cell<usize>,
    last: std::cell::RefCell<Option<State>>,
}

/// Finds a root of an increasing function on `[lo, hi]`, starting from
/// `start` and expanding the bracket geometrically. Returns the evaluated
/// point with the smallest `|h|`.
fn find_root<T: Clone>(
    mut h: impl FnMut(f64) -> std::result::Result<(f64, T), Failure>,
    start: f64,
    step: f64,
    limits: (f64, f64),
    ftol: f64,
    xtol: f64,
) -> std::result::Result<(f64, T), Failure> {
    let (lo_lim, hi_lim) = limits;
    let (h0, s0) = h(start)?;
    let mut best = (h0.abs(), s0.clone());
    if h0.abs() <= ftol {
        return Ok((h0, s0));
    }
    let keep = |v: f64, s: &T, best: &mut (f64, T)| {
        if v.abs() < best.0 {
            *best = (v.abs(), s.clone());
        }
    };
    // Bracket: a has h < 0, b has h > 0.
    let (mut a, mut ha, mut b, mut hb);
    let mut width = step;
    if h0 < 0.0 {
        (a, ha) = (start, h0);
        loop {
            let next = (a + width).min(hi_lim);
            let (v, s) = h(next)?;
            keep(v, &s, &mut best);
            if v.abs() <= ftol {
                return Ok((v, s));
            }
            if v > 0.0 {
                (b, hb) = (next, v);
                break;
            }
            if next >= hi_lim {
                return Ok((best.0, best.1));
            }
            (a, ha) = (next, v);
            width *= 2.0;
        }
    } else {
        (b, hb) = (start, h0);
        loop {
            let next = (b - width).max(lo_lim);
            let (v, s) = h(next)?;
            keep(v, &s, &mut best);
            if v.abs() <= ftol {
                return Ok((v, s));
            }
            if v < 0.0 {
                (a, ha) = (next, v);
                break;
            }
            if next <= lo_lim {
                return Ok((best.0, best.1));
            }
            (b, hb) = (next, v);
            width *= 2.0;
        }
    }
    // Illinois false position, falling back to bisection when a step stalls.
    let mut side = 0i8;
    for _ in 0..200 {
        if b - a <= xtol {
            break;
        }
        let mut c = b - hb * (b - a) / (hb - ha);
        if !(c > a && c < b) || !c.is_finite() {
            c = 0.5 * (a + b);
        }
        let (v, s) = h(c)?;
        keep(v, &s, &mut best);
        if v.abs() <= ftol {
            return Ok((v, s));
        }
        if v < 0.0 {
            (a, ha) = (c, v);
            if side == -1 {
                hb *= 0.5;
            }
            side = -1;
        } else {
            (b, hb) = (c, v);
            if side == 1 {
                ha *= 0.5;
            }
            side = 1;
        }
    }
    Ok((best.0, best.1))
}

impl<'a> Nested<'a> {
    fn eval(&self, theta: &[f64], tau: f64) -> std::result::Result<Vec<f64>, Failure> {
        let used = self.evals.get();
        if used >= self.options.max_evals {
            return Err(BudgetExhausted.into());
        }
        self.evals.set(used + 1);
        let g = self.layer.evaluate(theta, tau, self.plan)?.values;
        *self.last.borrow_mut() = Some(State {
            tau,
            theta: theta.to_vec(),
            g: g.clone(),
        });
        Ok(g)
    }

    /// Chooses `τ` for fixed scales so the sum equation holds to `ftol`
    /// (relative to the target). `τ = 0` when the layer is tight.
    fn fit_shift(&self, theta: &[f64], warm_tau: f64, ftol: f64) -> std::result::Result<State, Failure> {
        let sum = |g: &[f64]| g.iter().zip(&self.weights).map(|(g, w)| g * w).sum::<f64>();
        let scale = self.target.max(1e-12);
        let g0 = self.eval(theta, 0.0)?;
        if sum(&g0) - self.target <= self.options.inner_tol * scale {
            return Ok(State {
                tau: 0.0,
                theta: theta.to_vec(),
                g: g0,
            });
        }
        let start = if warm_tau > 0.0 { warm_tau } else { 1e-3 };
        let (_, state) = find_root(
            |tau| {
                let tau = tau.max(0.0);
                let g = self.eval(theta, tau)?;
                // Decreasing in τ, so negate.
                let v = self.target - sum(&g);
                Ok((v, State { tau, theta: theta.to_vec(), g }))
            },
            start,
            start.max(1e-3),
            (0.0, TAU_LIMIT),
            ftol * scale,
            1e-12 * (1.0 + start),
        )?;
        Ok(state)
    }

    /// Damped Newton iteration on `ln θ` for the first `K − 1` equations, with
    /// `τ` re-solved at every trial point. `None` when it stalls.
    fn newton(&self, k: usize) -> std::result::Result<Option<State>, Failure> {
        let m = k - 1;
        let precise = self.options.inner_tol * 1e-3;
        let mut state = self.fit_shift(&vec![1.0; k], 0.0, precise)?;
        let residual = |s: &State| (0..m).map(|i| s.g[i] - self.x[i]).collect::<Vec<f64>>();
        let norm = |r: &[f64]| r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let bound = LOG2_THETA_LIMIT * std::f64::consts::LN_2;
        for _ in 0..60 {
            let r = residual(&state);
            if norm(&r) <= self.options.inner_tol {
                return Ok(Some(state));
            }
            let h: f64 = 1e-3;
            let mut jac = DMatrix::zeros(m, m);
            for j in 0..m {
                let mut trial = state.theta.clone();
                trial[j] *= h.exp();
                let moved = self.fit_shift(&trial, state.tau, precise)?;
                for i in 0..m {
                    jac[(i, j)] = (moved.g[i] - state.g[i]) / h;
                }
            }
            let Some(step) = jac.lu().solve(&DVector::from_vec(r.clone())) else {
                return Ok(None);
            };
            let largest = step.amax();
            let mut alpha = if largest > 2.0 { 2.0 / largest } else { 1.0 };
            let mut improved = None;
            for _ in 0..12 {
                let trial: Vec<f64> = (0..k)
                    .map(|i| {
                        if i < m {
                            (state.theta[i].ln() - alpha * step[i]).clamp(-bound, bound).exp()
                        } else {
                            1.0
                        }
                    })
                    .collect();
                let next = self.fit_shift(&trial, state.tau, precise)?;
                if norm(&residual(&next)) < norm(&r) {
                    improved = Some(next);
                    break;
                }
                alpha *= 0.5;
            }
            match improved {
                Some(next) => state = next,
                None => return Ok(None),
            }
        }
        Ok(None)
    }

    /// Solves levels `0..=level` for the given scales (entries `≥ level` fixed).
    fn fit(&self, level: usize, theta: &[f64], warm: &State) -> std::result::Result<State, Failure> {
        let ftol = self.options.inner_tol;
        if level == 0 {
            return self.fit_shift(theta, warm.tau, ftol);
        }
        let i = level - 1;
        let start = warm.theta[i].log2();
        let (_, state) = find_root(
            |log_theta| {
                let mut trial = theta.to_vec();
                trial[i] = log_theta.exp2();
                let state = self.fit(level - 1, &trial, warm)?;
                Ok((state.g[i] - self.x[i], state))
            },
            start,
            1.0,
            (-LOG2_THETA_LIMIT, LOG2_THETA_LIMIT),
            ftol,
            1e-7,
        )?;
        Ok(state)
    }
}

/// Solves one layer: finds `θ` (last entry 1) and `τ` with `g_t = x_t` for
/// every layer type.
pub fn solve_layer(layer: &Layer<'_>, env: &Environment<f64>, x: &[f64], options: &SolverOptions) -> Result<LayerSolution> {
    let k = layer.types().len();
    if x.len() != k {
        return Err(domain(format!("expected {k} interim values, got {}", x.len())));
    }
    if x.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
        return Err(domain("solver layers need interim values strictly inside (0, 1)"));
    }
    let plan = QmcPlan::new(k, options.points, options.shifts, options.seed)?;
    let weights: Vec<f64> = layer.types().iter().map(|&t| *env.f(t)).collect();
    let target = weights.iter().zip(x).map(|(w, v)| w * v).sum();
    let nested = Nested {
        layer,
        weights,
        x: x.to_vec(),
        target,
        plan: &plan,
        options,
        evals: Cell::new(0),
        last: std::cell::RefCell::new(None),
    };
    let warm = State {
        tau: 0.0,
        theta: vec![1.0; k],
        g: vec![0.0; k],
    };
    let theta = vec![1.0; k];
    let attempt = match nested.newton(k) {
        Ok(Some(state)) => Ok(state),
        Ok(None) => {
            debug!("Newton iteration stalled; falling back to nested root finding");
            nested.fit(k - 1, &theta, &warm)
        }
        Err(e) => Err(e),
    };
    let state = match attempt {
        Ok(state) => state,
        Err(Failure::Other(e)) => return Err(e),
        Err(Failure::Budget) => {
            debug!("layer solver exhausted its budget of {} evaluations", options.max_evals);
            nested.last.borrow().clone().unwrap_or(warm)
        }
    };
    let residuals: Vec<f64> = state.g.iter().zip(x).map(|(g, v)| (g - v).abs()).collect();
    let converged = residuals.iter().all(|&r| r <= options.tol);
    Ok(LayerSolution {
        types: layer.types().to_vec(),
        theta: state.theta,
        tau: state.tau,
        report: SolverReport {
            residuals,
            evaluations: nested.evals.get(),
            converged,
        },
    })
}

/// Solves the parameterized dice of a barrier set `set` (no higher bands);
/// `x_set` lists the interim values of `set` in increasing type order.
pub fn solve_barrier_dice(
    env: &Environment<f64>,
    set: TypeSet,
    x_set: &[f64],
    options: &SolverOptions,
) -> Result<LayerSolution> {
    let layer = Layer::new(env, set, vec![0.0; env.candidates()])?;
    solve_layer(&layer, env, x_set, options)
}
