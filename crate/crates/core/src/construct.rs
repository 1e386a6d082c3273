//! Single-winner dice construction: repeatedly give a barrier-set type a new top
//! face with as much probability as feasibility allows, then condition on that
//! face not winning.

use log::debug;

use crate::dice::{DiceSystem, Die, LOSING_FACE};
use crate::env::Environment;
use crate::error::{domain, Error, Result};
use crate::feasibility::{
    active_types, check_feasibility_single_winner, find_barrier_set, min_nonempty_submodular,
    slack_single_winner,
};
use crate::numeric::Scalar;
use crate::sets::TypeSet;

#[derive(Clone, Debug)]
pub struct DecrementResult<S> {
    pub env: Environment<S>,
    pub x: Vec<S>,
    pub q: S,
}

/// Conditions `(f, x)` on a new top face of `t_star`, carrying probability `q`,
/// not winning.
pub fn decrement<S: Scalar>(
    env: &Environment<S>,
    x: &[S],
    t_star: usize,
    q: S,
) -> Result<DecrementResult<S>> {
    if t_star >= env.types() {
        return Err(domain(format!("type index {t_star} is out of range")));
    }
    let f_star = env.f(t_star).clone();
    let mass = f_star.clone() * x[t_star].clone();
    if q < S::zero() || (q.clone() - mass.clone()).is_positive() && !(q.clone() - mass).is_tight() {
        return Err(domain(format!("decrement amount {q} is outside [0, f(t*)x(t*)]")));
    }
    if q >= S::one() {
        return Err(domain("decrement amount must be below 1"));
    }
    let rest = S::one() - q.clone();
    let owner = env.owner(t_star);
    let mut f = env.prior().to_vec();
    let mut xp = x.to_vec();
    for t in 0..env.types() {
        if t == t_star {
            if (q.clone() - f_star.clone()).is_tight() {
                if x[t].clone() < S::one() - S::eps() {
                    debug!("decrement: q = f(t*) branch taken with x(t*) = {}", x[t]);
                }
                f[t] = S::zero();
                xp[t] = S::zero();
            } else {
                let left = f_star.clone() - q.clone();
                f[t] = left.clone() / rest.clone();
                xp[t] = (f_star.clone() * x[t].clone() - q.clone()) / left;
            }
        } else if env.owner(t) == owner {
            f[t] = f[t].clone() / rest.clone();
        } else {
            xp[t] = xp[t].clone() / rest.clone();
        }
    }
    for v in xp.iter_mut() {
        *v = v.clone().clamp_to(S::zero(), S::one());
    }
    // Renormalize the decremented candidate (a no-op in exact arithmetic).
    let range = env.layout().range(owner).expect("candidate in range");
    let total = range.clone().fold(S::zero(), |acc, t| acc + f[t].clone());
    for t in range {
        f[t] = S::max_of(f[t].clone() / total.clone(), S::zero());
    }
    Ok(DecrementResult {
        env: env.with_prior(f)?,
        x: xp,
        q,
    })
}

/// Candidate sets for the decrement bound: prefixes of the other active types
/// of `t*`'s candidate and of the active types of all other candidates, both
/// sorted by decreasing `x`.
pub fn decrement_level_sets<S: Scalar>(env: &Environment<S>, x: &[S], t_star: usize) -> Vec<TypeSet> {
    let owner = env.owner(t_star);
    let active = active_types(env, x).without(t_star);
    let sort = |mut v: Vec<usize>| {
        v.sort_by(|&a, &b| x[b].partial_cmp(&x[a]).expect("comparable").then(a.cmp(&b)));
        v
    };
    let siblings = sort(active.iter().filter(|&t| env.owner(t) == owner).collect());
    let others = sort(active.iter().filter(|&t| env.owner(t) != owner).collect());
    let mut sets = Vec::new();
    let mut a = TypeSet::EMPTY;
    for k in 0..=siblings.len() {
        if k > 0 {
            a.insert(siblings[k - 1]);
        }
        let mut b = a;
        for l in 0..=others.len() {
            if l > 0 {
                b.insert(others[l - 1]);
            }
            if !b.is_empty() {
                sets.push(b);
            }
        }
    }
    sets
}

/// `h(S) = σ(S) / f(S ∖ S_{i*})`, or `None` when the denominator vanishes.
pub fn decrement_bound<S: Scalar>(env: &Environment<S>, x: &[S], t_star: usize, set: TypeSet) -> Option<S> {
    let owner = env.owner(t_star);
    let outside = set.difference(env.layout().types_of(owner));
    let denom = env.f_of_set(outside);
    if !denom.has_mass() {
        return None;
    }
    Some(slack_single_winner(env, x, set) / denom)
}

/// Largest `q ∈ [0, f(t*)x(t*)]` keeping the decremented rule feasible.
pub fn max_decrement_q<S: Scalar>(env: &Environment<S>, x: &[S], t_star: usize) -> S {
    let cap = env.f(t_star).clone() * x[t_star].clone();
    let bound = decrement_level_sets(env, x, t_star)
        .into_iter()
        .filter_map(|set| decrement_bound(env, x, t_star, set))
        .fold(cap.clone(), S::min_of);
    bound.clamp_to(S::zero(), cap)
}

/// One recursive step of the construction.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstructionStep<S> {
    pub t_star: usize,
    pub q: S,
    /// Probability of the new top face on `t*`'s die, `q / f(t*)`.
    pub face_prob: S,
    pub active: usize,
    pub barrier: usize,
}

#[derive(Clone, Debug)]
pub struct Construction<S> {
    pub dice: DiceSystem<S>,
    pub steps: Vec<ConstructionStep<S>>,
}

impl<S> Construction<S> {
    /// Number of recursive calls made.
    pub fn recursive_calls(&self) -> usize {
        self.steps.len()
    }
}

/// Builds single-winner dice implementing the feasible interim rule `x`.
pub fn construct_dice<S: Scalar>(env: &Environment<S>, x: &[S]) -> Result<Construction<S>> {
    let verdict = check_feasibility_single_winner(env, x)?;
    verdict.into_result(|set| env.layout().describe(set))?;
    let types = env.types();
    let step_cap = types * types + 1;
    let mut current_env = env.clone();
    let mut current_x = x.to_vec();
    let mut steps: Vec<ConstructionStep<S>> = Vec::new();
    let base: Vec<Die<S>> = loop {
        let active = active_types(&current_env, &current_x);
        if active.is_empty() {
            break vec![Die::point(LOSING_FACE); types];
        }
        let sure = active.iter().find(|&t| {
            (current_env.f(t).clone() * current_x[t].clone() - S::one()).is_tight()
        });
        if let Some(t) = sure {
            let mut dice = vec![Die::point(LOSING_FACE); types];
            dice[t] = Die::point(1.0);
            break dice;
        }
        let barrier = find_barrier_set(&current_env, &current_x)?;
        if let Some(prev) = steps.last() {
            let progressed = active.len() < prev.active
                || (active.len() == prev.active && barrier.len() < prev.barrier);
            if !progressed {
                let (set, slack) =
                    min_nonempty_submodular(active, |s| slack_single_winner(&current_env, &current_x, s))?;
                return Err(Error::NoProgress {
                    step: steps.len(),
                    detail: format!(
                        "active types {} and barrier size {} did not shrink; smallest slack {} at {}",
                        active.len(),
                        barrier.len(),
                        slack,
                        current_env.layout().describe(set)
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
        let cap = current_env.f(t_star).clone() * current_x[t_star].clone();
        let mut q = max_decrement_q(&current_env, &current_x, t_star);
        if (cap.clone() - q.clone()).is_tight() {
            q = cap;
        }
        let face_prob = (q.clone() / current_env.f(t_star).clone()).clamp_to(S::zero(), S::one());
        steps.push(ConstructionStep {
            t_star,
            q: q.clone(),
            face_prob,
            active: active.len(),
            barrier: barrier.len(),
        });
        let next = decrement(&current_env, &current_x, t_star, q)?;
        current_env = next.env;
        current_x = next.x;
    };
    let mut faces: Vec<Vec<(f64, S)>> = base.into_iter().map(|d| d.faces().to_vec()).collect();
    let mut top = faces
        .iter()
        .flat_map(|f| f.iter().map(|(v, _)| *v))
        .fold(f64::NEG_INFINITY, f64::max);
    for step in steps.iter().rev() {
        let face = top.max(0.0) + 1.0;
        let keep = S::one() - step.face_prob.clone();
        let die = &mut faces[step.t_star];
        for (_, p) in die.iter_mut() {
            *p = p.clone() * keep.clone();
        }
        die.push((face, step.face_prob.clone()));
        top = face;
    }
    let dice = faces.into_iter().map(Die::canonical).collect();
    Ok(Construction {
        dice: DiceSystem::new(dice),
        steps,
    })
}
