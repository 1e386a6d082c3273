//! Shared dice for `n` i.i.d. candidates under a single-winner constraint.

use log::debug;

use crate::construct::ConstructionStep;
use crate::dice::{DiceSystem, Die, LOSING_FACE};
use crate::env::Environment;
use crate::error::{domain, Error, Result};
use crate::feasibility::{
    check_feasibility_symmetric, find_barrier_set_iid, min_nonempty_submodular, slack_symmetric,
    validate_symmetric,
};
use crate::numeric::{Scalar, EPS};
use crate::sets::TypeSet;

/// Bisection tolerance on the decrement amount.
pub const Q_TOLERANCE: f64 = 1e-12;

/// Types with `f(t)x(t)` above the mass floor.
pub fn active_types_iid(f: &[f64], x: &[f64]) -> TypeSet {
    TypeSet::from_indices((0..f.len()).filter(|&t| (f[t] * x[t]).has_mass()))
}

/// Largest `q` for which `x'(t*)` stays non-negative: `1 − (1 − n f x)^{1/n}`.
/// Never exceeds `f(t*)` on a feasible instance.
pub fn winning_cap(n: usize, f: f64, x: f64) -> f64 {
    let radicand = 1.0 - n as f64 * f * x;
    let radicand = if radicand.abs() <= EPS { 0.0 } else { radicand.max(0.0) };
    (1.0 - radicand.powf(1.0 / n as f64)).clamp(0.0, f)
}

/// Conditions `(f, x)` on no candidate rolling a new top face of `t*` that
/// carries total probability `q`.
pub fn decrement_symmetric(
    n: usize,
    f: &[f64],
    x: &[f64],
    t_star: usize,
    q: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 {
        return Err(domain(format!("symmetric instances need n ≥ 2, got {n}")));
    }
    if t_star >= f.len() || f.len() != x.len() {
        return Err(domain(format!("type index {t_star} is out of range")));
    }
    let f_star = f[t_star];
    if !(0.0..1.0).contains(&q) || q > f_star + EPS {
        return Err(domain(format!("decrement amount {q} is outside [0, f(t*)] or not below 1")));
    }
    let rest = 1.0 - q;
    let n_f = n as f64;
    let mut fp = f.to_vec();
    let mut xp = x.to_vec();
    for t in 0..f.len() {
        if t == t_star {
            if (q - f_star).abs() <= EPS {
                fp[t] = 0.0;
                xp[t] = 0.0;
            } else {
                let left = f_star - q;
                fp[t] = left / rest;
                xp[t] = (f_star * x[t] - (1.0 - rest.powi(n as i32)) / n_f)
                    / (left * rest.powi(n as i32 - 1));
            }
        } else {
            fp[t] = f[t] / rest;
            xp[t] = x[t] / rest.powi(n as i32 - 1);
        }
    }
    for v in xp.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    let total: f64 = fp.iter().sum();
    for p in fp.iter_mut() {
        *p = (*p / total).max(0.0);
    }
    Ok((fp, xp))
}

/// Prefixes of the active types other than `t*`, ordered by decreasing `x`.
/// The order does not change under the decrement, so these are the only sets
/// whose constraint can bind.
pub fn symmetric_level_sets(f: &[f64], x: &[f64], t_star: usize) -> Vec<TypeSet> {
    let mut others: Vec<usize> = active_types_iid(f, x).without(t_star).iter().collect();
    others.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
    let mut set = TypeSet::EMPTY;
    others
        .into_iter()
        .map(|t| {
            set.insert(t);
            set
        })
        .collect()
}

// Slack of a set avoiding t* after decrementing by q, scaled by (1 − q)^n.
fn scaled_slack(n: usize, mass: f64, weighted: f64, q: f64) -> f64 {
    let n_i = n as i32;
    (1.0 - q).powi(n_i) - (1.0 - q - mass).max(0.0).powi(n_i) - n as f64 * weighted
}

/// Largest `q ≤ cap` keeping the constraint of `set` (which avoids `t*`)
/// satisfied. The scaled slack is non-increasing in `q`, so bisection applies.
pub fn symmetric_threshold(n: usize, f: &[f64], x: &[f64], set: TypeSet, cap: f64) -> f64 {
    let mass: f64 = set.iter().map(|t| f[t]).sum();
    let weighted: f64 = set.iter().map(|t| f[t] * x[t]).sum();
    let phi = |q: f64| scaled_slack(n, mass, weighted, q);
    if phi(cap) >= 0.0 {
        return cap;
    }
    if phi(0.0) <= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, cap);
    while hi - lo > Q_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if phi(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if phi(lo).abs() <= EPS && phi(0.5 * lo).abs() <= EPS {
        debug!("symmetric threshold: constraint is flat near q = {lo}");
    }
    lo
}

/// Largest feasible decrement for `t*`, within `[0, winning_cap]`.
pub fn max_decrement_q_symmetric(n: usize, f: &[f64], x: &[f64], t_star: usize) -> f64 {
    let cap = winning_cap(n, f[t_star], x[t_star]);
    symmetric_level_sets(f, x, t_star)
        .into_iter()
        .map(|set| symmetric_threshold(n, f, x, set, cap))
        .fold(cap, f64::min)
        .max(0.0)
}

#[derive(Clone, Debug)]
pub struct SymmetricConstruction {
    /// One die per type, shared by every candidate.
    pub dice: Vec<Die<f64>>,
    pub steps: Vec<ConstructionStep<f64>>,
}

impl SymmetricConstruction {
    pub fn recursive_calls(&self) -> usize {
        self.steps.len()
    }

    /// The shared dice copied to each of `n` candidates.
    pub fn replicate(&self, n: usize) -> DiceSystem<f64> {
        DiceSystem::new((0..n).flat_map(|_| self.dice.iter().cloned()).collect())
    }
}

/// Single-winner environment of `n` candidates that all draw from `f`.
pub fn iid_environment(n: usize, f: &[f64]) -> Result<Environment<f64>> {
    Environment::single_winner(vec![f.to_vec(); n])
}

/// Builds shared dice implementing the feasible symmetric rule `x`.
pub fn construct_symmetric_dice(n: usize, f: &[f64], x: &[f64]) -> Result<SymmetricConstruction> {
    validate_symmetric(n, f, x)?;
    check_feasibility_symmetric(n, f, x)?.into_result(|set| format!("{set:?}"))?;
    let types = f.len();
    let step_cap = types * types + 1;
    let mut cur_f = f.to_vec();
    let mut cur_x = x.to_vec();
    let mut steps: Vec<ConstructionStep<f64>> = Vec::new();
    let base: Vec<Die<f64>> = loop {
        let active = active_types_iid(&cur_f, &cur_x);
        let mut dice = vec![Die::point(LOSING_FACE); types];
        if active.is_empty() {
            break dice;
        }
        if active.len() == 1 {
            let t = active.first().expect("one active type");
            let p = (winning_cap(n, cur_f[t], cur_x[t]) / cur_f[t]).clamp(0.0, 1.0);
            dice[t] = Die::two_sided(1.0, p);
            break dice;
        }
        let barrier = find_barrier_set_iid(n, &cur_f, &cur_x)?;
        if let Some(prev) = steps.last() {
            let progressed = active.len() < prev.active
                || (active.len() == prev.active && barrier.len() < prev.barrier);
            if !progressed {
                let (set, slack) =
                    min_nonempty_submodular(active, |s| slack_symmetric(n, &cur_f, &cur_x, s))?;
                return Err(Error::NoProgress {
                    step: steps.len(),
                    detail: format!(
                        "active types {} and barrier size {} did not shrink; smallest slack {slack} at {set:?}",
                        active.len(),
                        barrier.len()
                    ),
                });
            }
        }
        if steps.len() >= step_cap {
            return Err(Error::NoProgress {
                step: steps.len(),
                detail: format!("exceeded {step_cap} recursive calls"),
            });
        }
        let t_star = barrier.first().expect("barrier set is non-empty");
        let cap = winning_cap(n, cur_f[t_star], cur_x[t_star]);
        let mut q = max_decrement_q_symmetric(n, &cur_f, &cur_x, t_star);
        if (cap - q).abs() <= EPS {
            q = cap;
        }
        let exhausted = (q - cur_f[t_star]).abs() <= EPS;
        let face_prob = (q / cur_f[t_star]).clamp(0.0, 1.0);
        steps.push(ConstructionStep {
            t_star,
            q,
            face_prob,
            active: active.len(),
            barrier: barrier.len(),
        });
        let (next_f, mut next_x) = decrement_symmetric(n, &cur_f, &cur_x, t_star, q)?;
        if q == cap && !exhausted {
            // The top face used up all of t*'s winning probability.
            next_x[t_star] = 0.0;
        }
        cur_f = next_f;
        cur_x = next_x;
    };
    let mut faces: Vec<Vec<(f64, f64)>> = base.into_iter().map(|d| d.faces().to_vec()).collect();
    let mut top = faces
        .iter()
        .flat_map(|f| f.iter().map(|(v, _)| *v))
        .fold(f64::NEG_INFINITY, f64::max);
    for step in steps.iter().rev() {
        let face = top.max(0.0) + 1.0;
        let die = &mut faces[step.t_star];
        for (_, p) in die.iter_mut() {
            *p *= 1.0 - step.face_prob;
        }
        die.push((face, step.face_prob));
        top = face;
    }
    Ok(SymmetricConstruction {
        dice: faces.into_iter().map(Die::canonical).collect(),
        steps,
    })
}
