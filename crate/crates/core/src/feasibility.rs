//! Border constraints: slack functions, feasibility verdicts and barrier sets.

use crate::env::Environment;
use crate::error::{domain, Error, Result};
use crate::numeric::Scalar;
use crate::sets::TypeSet;

/// Subsets of at most this many types are enumerated exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 20;
/// Type count limit for the brute-force matroid feasibility check.
pub const MATROID_CHECK_LIMIT: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct SlackReport<S> {
    pub set: TypeSet,
    pub slack: S,
    pub tight: bool,
}

impl<S: Scalar> SlackReport<S> {
    pub fn new(set: TypeSet, slack: S) -> Self {
        let tight = slack.is_tight();
        SlackReport { set, slack, tight }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict<S> {
    pub feasible: bool,
    /// Most violated constraint found, present iff infeasible.
    pub witness: Option<SlackReport<S>>,
}

impl<S: Scalar> Verdict<S> {
    fn from_worst(worst: Option<SlackReport<S>>) -> Self {
        match worst {
            Some(report) if report.slack.is_violation() => Verdict {
                feasible: false,
                witness: Some(report),
            },
            _ => Verdict {
                feasible: true,
                witness: None,
            },
        }
    }

    /// Converts an infeasible verdict into an error.
    pub fn into_result(self, describe: impl Fn(TypeSet) -> String) -> Result<()> {
        match self.witness {
            None => Ok(()),
            Some(w) => Err(Error::Infeasible {
                set: describe(w.set),
                slack: w.slack.to_f64_lossy(),
            }),
        }
    }
}

fn keep_worst<S: Scalar>(worst: &mut Option<SlackReport<S>>, set: TypeSet, slack: S) {
    if worst.as_ref().is_none_or(|w| slack < w.slack) {
        *worst = Some(SlackReport::new(set, slack));
    }
}

/// `Σ_{t∈S} f(t) x(t)`.
pub fn winning_mass<S: Scalar>(env: &Environment<S>, x: &[S], set: TypeSet) -> S {
    set.iter()
        .fold(S::zero(), |acc, t| acc + env.f(t).clone() * x[t].clone())
}

/// Types with `f(t)·x(t) > 0` (above the mass floor in double mode).
pub fn active_types<S: Scalar>(env: &Environment<S>, x: &[S]) -> TypeSet {
    TypeSet::from_indices(
        (0..env.types()).filter(|&t| (env.f(t).clone() * x[t].clone()).has_mass()),
    )
}

/// `f(S) − Σ_{t∈S} f(t)x(t)` with `f(S) = 1 − Π_i (1 − f(S_i))`.
pub fn slack_single_winner<S: Scalar>(env: &Environment<S>, x: &[S], set: TypeSet) -> S {
    env.f_of_set(set) - winning_mass(env, x, set)
}

/// `R(S) − Σ_{t∈S} f(t)x(t)` where `R` is the expected rank.
pub fn slack_matroid<S: Scalar>(env: &Environment<S>, x: &[S], set: TypeSet) -> Result<S> {
    Ok(env.expected_rank(set)? - winning_mass(env, x, set))
}

/// Level sets `{t : x(t) ≥ v}` for each distinct positive value `v` of `x`.
pub fn level_sets<S: Scalar>(x: &[S]) -> Vec<TypeSet> {
    let mut order: Vec<usize> = (0..x.len()).filter(|&t| x[t] > S::zero()).collect();
    order.sort_by(|&a, &b| x[b].partial_cmp(&x[a]).expect("comparable values").then(a.cmp(&b)));
    let mut sets = Vec::new();
    let mut current = TypeSet::EMPTY;
    for (pos, &t) in order.iter().enumerate() {
        current.insert(t);
        let last_of_value = order.get(pos + 1).is_none_or(|&next| x[next] != x[t]);
        if last_of_value {
            sets.push(current);
        }
    }
    sets
}

/// Single-winner Border check restricted to level sets of `x`.
pub fn check_feasibility_single_winner<S: Scalar>(
    env: &Environment<S>,
    x: &[S],
) -> Result<Verdict<S>> {
    if !env.is_single_winner() {
        return Err(domain("single-winner check needs a Uniform(1) constraint"));
    }
    env.check_interim(x)?;
    let mut worst = None;
    for set in level_sets(x) {
        keep_worst(&mut worst, set, slack_single_winner(env, x, set));
    }
    Ok(Verdict::from_worst(worst))
}

/// Single-winner Border check over every subset of types.
pub fn check_feasibility_exhaustive<S: Scalar>(
    env: &Environment<S>,
    x: &[S],
) -> Result<Verdict<S>> {
    if !env.is_single_winner() {
        return Err(domain("single-winner check needs a Uniform(1) constraint"));
    }
    env.check_interim(x)?;
    exhaustive_limit(env.types())?;
    let mut worst = None;
    for set in env.layout().all_types().subsets() {
        keep_worst(&mut worst, set, slack_single_winner(env, x, set));
    }
    Ok(Verdict::from_worst(worst))
}

/// Generalized Border check `Σ_{t∈S} f(t)x(t) ≤ R(S)` over every subset of types.
pub fn check_feasibility_matroid<S: Scalar>(env: &Environment<S>, x: &[S]) -> Result<Verdict<S>> {
    if env.matroid().is_none() {
        return Err(domain("matroid check needs a matroid constraint"));
    }
    env.check_interim(x)?;
    if env.types() > MATROID_CHECK_LIMIT {
        return Err(Error::Capacity {
            what: "type count for the matroid check",
            limit: MATROID_CHECK_LIMIT,
            actual: env.types(),
            hint: "; single-winner environments can use the level-set check",
        });
    }
    let mut worst = None;
    for set in env.layout().all_types().subsets() {
        keep_worst(&mut worst, set, slack_matroid(env, x, set)?);
    }
    Ok(Verdict::from_worst(worst))
}

/// Level-set check for single-winner environments, brute force otherwise.
pub fn check_feasibility<S: Scalar>(env: &Environment<S>, x: &[S]) -> Result<Verdict<S>> {
    if env.is_single_winner() {
        check_feasibility_single_winner(env, x)
    } else {
        check_feasibility_matroid(env, x)
    }
}

/// Symmetric slack `1 − (1 − f(S))^n − n Σ_{t∈S} f(t)x(t)` for `n` i.i.d. candidates.
pub fn slack_symmetric<S: Scalar>(n: usize, f: &[S], x: &[S], set: TypeSet) -> S {
    let mut mass = S::zero();
    let mut weighted = S::zero();
    for t in set.iter() {
        mass = mass + f[t].clone();
        weighted = weighted + f[t].clone() * x[t].clone();
    }
    S::one() - (S::one() - mass).powu(n as u32) - S::from_count(n) * weighted
}

pub fn validate_symmetric<S: Scalar>(n: usize, f: &[S], x: &[S]) -> Result<()> {
    if n < 2 {
        return Err(domain(format!("symmetric instances need n ≥ 2, got {n}")));
    }
    if f.len() != x.len() {
        return Err(domain(format!(
            "prior has {} entries but the interim rule has {}",
            f.len(),
            x.len()
        )));
    }
    if f.len() > crate::sets::MAX_TYPES {
        return Err(Error::Capacity {
            what: "type count",
            limit: crate::sets::MAX_TYPES,
            actual: f.len(),
            hint: "",
        });
    }
    let mut total = S::zero();
    for (t, (p, v)) in f.iter().zip(x).enumerate() {
        if *p < S::zero() {
            return Err(domain(format!("type {t} has negative probability")));
        }
        if *v < S::zero() || *v > S::one() {
            return Err(domain(format!("interim probability of type {t} is outside [0, 1]")));
        }
        total = total + p.clone();
    }
    if (total - S::one()).abs() > S::sum_tolerance() {
        return Err(domain("prior does not sum to 1"));
    }
    Ok(())
}

/// Symmetric Border check on the level sets of `x`.
pub fn check_feasibility_symmetric<S: Scalar>(n: usize, f: &[S], x: &[S]) -> Result<Verdict<S>> {
    validate_symmetric(n, f, x)?;
    let mut worst = None;
    for set in level_sets(x) {
        keep_worst(&mut worst, set, slack_symmetric(n, f, x, set));
    }
    Ok(Verdict::from_worst(worst))
}

fn exhaustive_limit(size: usize) -> Result<()> {
    if size > EXHAUSTIVE_LIMIT {
        return Err(Error::Capacity {
            what: "ground set for exhaustive subset search",
            limit: EXHAUSTIVE_LIMIT,
            actual: size,
            hint: "",
        });
    }
    Ok(())
}

/// Minimum of `g` over non-empty subsets of `ground`: for each `t` the function
/// `S ↦ g(S ∪ {t})` is minimized over subsets of the remaining elements and
/// the best `t` wins. Ties keep the first set found (smallest `t`, then
/// subsets in increasing mask order).
pub fn min_nonempty_submodular<S: Scalar>(
    ground: TypeSet,
    mut g: impl FnMut(TypeSet) -> S,
) -> Result<(TypeSet, S)> {
    if ground.is_empty() {
        return Err(domain("cannot minimize over non-empty subsets of an empty set"));
    }
    exhaustive_limit(ground.len())?;
    let mut best: Option<(TypeSet, S)> = None;
    let mut remaining = ground;
    for t in ground.iter() {
        // Sets containing an earlier element were already covered by its pass.
        remaining.remove(t);
        for rest in remaining.subsets() {
            let set = rest.with(t);
            let value = g(set);
            if best.as_ref().is_none_or(|(_, b)| value < *b) {
                best = Some((set, value));
            }
        }
    }
    Ok(best.expect("ground set is non-empty"))
}

/// Barrier set of the active types under a slack oracle. Returns `active` when no
/// non-empty subset is tight; otherwise removes types in ascending order while a
/// non-empty tight set avoiding them remains.
pub fn barrier_set_with<S: Scalar>(
    active: TypeSet,
    mut slack: impl FnMut(TypeSet) -> S,
) -> Result<TypeSet> {
    if active.is_empty() {
        return Err(domain("barrier set requested with no active types"));
    }
    let (_, min) = min_nonempty_submodular(active, &mut slack)?;
    if min > S::eps() {
        return Ok(active);
    }
    let mut current = active;
    for t in active.iter() {
        let without = current.without(t);
        if without.is_empty() {
            continue;
        }
        let (_, value) = min_nonempty_submodular(without, &mut slack)?;
        if value <= S::eps() {
            current = without;
        }
    }
    Ok(current)
}

/// Barrier set for a single-winner or matroid environment.
pub fn find_barrier_set<S: Scalar>(env: &Environment<S>, x: &[S]) -> Result<TypeSet> {
    let active = active_types(env, x);
    if env.is_single_winner() {
        barrier_set_with(active, |set| slack_single_winner(env, x, set))
    } else {
        let mut failure = None;
        let set = barrier_set_with(active, |set| match slack_matroid(env, x, set) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                S::zero()
            }
        })?;
        match failure {
            Some(e) => Err(e),
            None => Ok(set),
        }
    }
}

/// Barrier set for `n` i.i.d. candidates sharing prior `f` and rule `x`.
pub fn find_barrier_set_iid<S: Scalar>(n: usize, f: &[S], x: &[S]) -> Result<TypeSet> {
    let active = TypeSet::from_indices(
        (0..f.len()).filter(|&t| (f[t].clone() * x[t].clone()).has_mass()),
    );
    barrier_set_with(active, |set| slack_symmetric(n, f, x, set))
}
