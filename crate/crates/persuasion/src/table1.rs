//! The three-action instance whose optimal persuasive schemes have no dice
//! implementation, and a mechanical verifier of the argument.

use std::collections::BTreeSet;
use std::fmt;

use num::{BigRational, One, Zero};

use crate::instance::{Action, ActionType, Instance, Payoff, Profile};
use crate::lp::{LinearProgram, Relation};
use crate::scheme::{check_persuasive, Scheme};

const A: usize = 0;
const B: usize = 1;
const C: usize = 2;
// Local type indices: "type 1" and "type 2".
const T1: usize = 0;
const T2: usize = 1;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn action(name: &str, types: [(BigRational, i64, Option<i64>); 2]) -> Action {
    Action {
        name: name.into(),
        types: types
            .into_iter()
            .enumerate()
            .map(|(k, (prob, s, r))| ActionType {
                name: (k + 1).to_string(),
                prob,
                sender: q(s, 1),
                receiver: r.map_or(Payoff::NegInf, |v| Payoff::Finite(q(v, 1))),
            })
            .collect(),
    }
}

/// Actions A, B, C with types "1" and "2":
/// A: ½ × (100, 2), ½ × (100, −∞); B: 0.99 × (1, 3), 0.01 × (1, −∞);
/// C: ½ × (0, 0), ½ × (0, 6), written as probability × (sender, receiver).
pub fn table1_instance() -> Instance {
    Instance::new(vec![
        action("A", [(q(1, 2), 100, Some(2)), (q(1, 2), 100, None)]),
        action("B", [(q(99, 100), 1, Some(3)), (q(1, 100), 1, None)]),
        action("C", [(q(1, 2), 0, Some(0)), (q(1, 2), 0, Some(6))]),
    ])
    .expect("the table instance is valid")
}

/// The optimal scheme: (1,*,1) → A; (1,*,2) → A or C with probability ½
/// each; (2,1,*) → B; (2,2,*) → C.
pub fn table1_scheme(instance: &Instance) -> Scheme {
    Scheme::from_fn(instance, |t| match (t[A], t[B], t[C]) {
        (T1, _, T1) => vec![q(1, 1), q(0, 1), q(0, 1)],
        (T1, _, _) => vec![q(1, 2), q(0, 1), q(1, 2)],
        (_, T1, _) => vec![q(0, 1), q(1, 1), q(0, 1)],
        _ => vec![q(0, 1), q(0, 1), q(1, 1)],
    })
    .expect("the table scheme is valid")
}

/// LP over direct schemes that always recommend an action. Variable
/// `k * n + i` is the probability of recommending `i` on profile `k`.
///
/// Recommending an action on a profile where its receiver payoff is −∞ is
/// excluded outright. Obedience constraints are kept against alternatives
/// whose payoffs are all finite. Against an alternative with a −∞ type the
/// constraint holds automatically whenever that type has positive posterior
/// weight and otherwise is a linear inequality; the LP drops it, so its
/// feasible set contains every persuasive scheme and its optima are bounds.
pub struct PersuasionLp {
    profiles: Vec<Profile>,
    n: usize,
    lp: LinearProgram,
}

impl PersuasionLp {
    pub fn new(instance: &Instance) -> Self {
        let profiles = instance.profiles();
        let n = instance.len();
        let vars = profiles.len() * n;
        let mut lp = LinearProgram::new(vars);
        for k in 0..profiles.len() {
            let mut row = vec![BigRational::zero(); vars];
            for i in 0..n {
                row[k * n + i] = BigRational::one();
            }
            lp.add(row, Relation::Eq, BigRational::one());
            for (i, &t) in profiles[k].types.iter().enumerate() {
                if instance.action_type(i, t).receiver == Payoff::NegInf {
                    lp.fix(k * n + i, BigRational::zero());
                }
            }
        }
        let all_finite =
            |j: usize| instance.actions()[j].types.iter().all(|t| t.receiver != Payoff::NegInf);
        for rec in 0..n {
            for alt in (0..n).filter(|&j| j != rec && all_finite(j)) {
                let mut row = vec![BigRational::zero(); vars];
                for (k, p) in profiles.iter().enumerate() {
                    let own = &instance.action_type(rec, p.types[rec]).receiver;
                    let other = &instance.action_type(alt, p.types[alt]).receiver;
                    if let (Payoff::Finite(u), Payoff::Finite(v)) = (own, other) {
                        row[k * n + rec] = &p.prob * (u - v);
                    }
                }
                lp.add(row, Relation::Ge, BigRational::zero());
            }
        }
        PersuasionLp { profiles, n, lp }
    }

    pub fn var(&self, profile: usize, action: usize) -> usize {
        profile * self.n + action
    }

    /// Objective: overall probability of recommending `action`.
    pub fn recommendation(&self, action: usize) -> Vec<BigRational> {
        let mut c = vec![BigRational::zero(); self.lp.vars()];
        for (k, p) in self.profiles.iter().enumerate() {
            c[self.var(k, action)] = p.prob.clone();
        }
        c
    }

    /// Objective: the sender's expected utility.
    pub fn sender_utility(&self, instance: &Instance) -> Vec<BigRational> {
        let mut c = vec![BigRational::zero(); self.lp.vars()];
        for (k, p) in self.profiles.iter().enumerate() {
            for i in 0..self.n {
                c[self.var(k, i)] = &p.prob * &instance.action_type(i, p.types[i]).sender;
            }
        }
        c
    }

    /// Objective: probability of recommending `action` on the profiles
    /// selected by `filter`.
    pub fn restricted(&self, action: usize, filter: impl Fn(&[usize]) -> bool) -> Vec<BigRational> {
        let mut c = vec![BigRational::zero(); self.lp.vars()];
        for (k, p) in self.profiles.iter().enumerate() {
            if filter(&p.types) {
                c[self.var(k, action)] = p.prob.clone();
            }
        }
        c
    }

    pub fn constrain(&mut self, coeffs: Vec<BigRational>, relation: Relation, rhs: BigRational) {
        self.lp.add(coeffs, relation, rhs);
    }

    pub fn fix(&mut self, profile: usize, action: usize, value: BigRational) {
        let var = self.var(profile, action);
        self.lp.fix(var, value);
    }

    pub fn maximize(&self, objective: &[BigRational]) -> Option<BigRational> {
        self.lp.maximize(objective).value().cloned()
    }

    pub fn minimize(&self, objective: &[BigRational]) -> Option<BigRational> {
        self.lp.minimize(objective).value().cloned()
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    /// Profiles matching `filter`, by index.
    pub fn matching(&self, filter: impl Fn(&[usize]) -> bool) -> Vec<usize> {
        (0..self.profiles.len()).filter(|&k| filter(&self.profiles[k].types)).collect()
    }
}

/// A die, named by action and type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DieLabel {
    pub action: usize,
    pub t: usize,
}

impl fmt::Display for DieLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = ["A", "B", "C"].get(self.action).copied().unwrap_or("?");
        write!(f, "{name}{}", self.t + 1)
    }
}

fn die(action: usize, t: usize) -> DieLabel {
    DieLabel { action, t }
}

/// Order facts about die supports. `above` holds the derived pairs `(x, y)`
/// where every face of `x` exceeds every face of `y`; `beats` holds `(x, y)`
/// when `x` shows a higher value than `y` with positive probability.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dominance {
    pub above: BTreeSet<(DieLabel, DieLabel)>,
    pub beats: BTreeSet<(DieLabel, DieLabel)>,
}

impl Dominance {
    /// Propagates `beats` through `above`: if `x` beats `y` with positive
    /// probability and every face of `y` exceeds every face of `z`, then `x`
    /// beats `z` with positive probability.
    pub fn close(&mut self) {
        loop {
            let added: Vec<(DieLabel, DieLabel)> = self
                .beats
                .iter()
                .flat_map(|&(x, y)| {
                    self.above
                        .iter()
                        .filter(move |&&(y2, _)| y2 == y)
                        .map(move |&(_, z)| (x, z))
                })
                .filter(|pair| !self.beats.contains(pair))
                .collect();
            if added.is_empty() {
                return;
            }
            self.beats.extend(added);
        }
    }

    /// Pairs where `x` beats `y` with positive probability although every
    /// face of `y` exceeds every face of `x`.
    pub fn conflicts(&self) -> Vec<(DieLabel, DieLabel)> {
        self.beats
            .iter()
            .filter(|(x, y)| self.above.contains(&(*y, *x)))
            .copied()
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceStatus {
    Contradiction,
    /// The named step could not be derived.
    Incomplete(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub number: usize,
    pub claim: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table1Trace {
    pub steps: Vec<TraceStep>,
    pub status: TraceStatus,
    /// Largest probability of recommending A over persuasive schemes.
    pub max_pr_a: BigRational,
    /// Largest probability of recommending B given that A is recommended
    /// with probability `max_pr_a`.
    pub max_pr_b: BigRational,
    pub optimal_sender_utility: BigRational,
    pub dominance: Dominance,
}

impl fmt::Display for Table1Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "max Pr[recommend A] = {}", self.max_pr_a)?;
        writeln!(f, "max Pr[recommend B] = {}", self.max_pr_b)?;
        writeln!(f, "optimal sender utility = {}", self.optimal_sender_utility)?;
        for step in &self.steps {
            writeln!(f, "step {}: {}", step.number, step.claim)?;
        }
        match &self.status {
            TraceStatus::Contradiction => writeln!(f, "status: CONTRADICTION"),
            TraceStatus::Incomplete(why) => writeln!(f, "status: INCOMPLETE ({why})"),
        }
    }
}

struct Verifier {
    steps: Vec<TraceStep>,
}

impl Verifier {
    fn push(&mut self, claim: String) {
        let number = self.steps.len() + 1;
        self.steps.push(TraceStep { number, claim });
    }

    fn stop(self, why: String, partial: Table1Trace) -> Table1Trace {
        Table1Trace {
            steps: self.steps,
            status: TraceStatus::Incomplete(why),
            ..partial
        }
    }
}

fn type_prob(instance: &Instance, action: usize, t: usize) -> BigRational {
    instance.action_type(action, t).prob.clone()
}

/// Re-derives the impossibility argument for the table instance:
/// optimality bounds by exact LPs, then forced recommendations, the die
/// orderings they imply, and the final contradiction.
pub fn verify_table1_no_dice() -> Table1Trace {
    let instance = table1_instance();
    let mut v = Verifier { steps: Vec::new() };
    let f = |a, t| type_prob(&instance, a, t);
    let mut trace = Table1Trace {
        steps: Vec::new(),
        status: TraceStatus::Incomplete("not started".into()),
        max_pr_a: BigRational::zero(),
        max_pr_b: BigRational::zero(),
        optimal_sender_utility: BigRational::zero(),
        dominance: Dominance::default(),
    };

    // Optimality bounds.
    let base = PersuasionLp::new(&instance);
    let Some(max_a) = base.maximize(&base.recommendation(A)) else {
        return v.stop("the LP for Pr[A] has no optimum".into(), trace);
    };
    let mut with_a = PersuasionLp::new(&instance);
    with_a.constrain(with_a.recommendation(A), Relation::Eq, max_a.clone());
    let Some(max_b) = with_a.maximize(&with_a.recommendation(B)) else {
        return v.stop("the LP for Pr[B] has no optimum".into(), trace);
    };
    trace.max_pr_a = max_a.clone();
    trace.max_pr_b = max_b.clone();
    // Closed forms: A needs type 1 and at least twice as much C-type-1 as
    // C-type-2 posterior weight; B then collects the profiles with A of type 2.
    let closed_a = f(A, T1) * (f(C, T1) + f(C, T2).min(f(C, T1) / q(2, 1)));
    let closed_b = f(A, T2) * f(B, T1);
    if max_a != closed_a || max_b != closed_b {
        return v.stop(
            format!("LP optimum ({max_a}, {max_b}) differs from the closed-form bound ({closed_a}, {closed_b})"),
            trace,
        );
    }
    let scheme = table1_scheme(&instance);
    let achieved = scheme.recommendation_probabilities(&instance);
    if !check_persuasive(&instance, &scheme).persuasive || achieved[A] != max_a || achieved[B] != max_b {
        return v.stop("the explicit scheme does not attain the bounds".into(), trace);
    }
    let Some(best) = base.maximize(&base.sender_utility(&instance)) else {
        return v.stop("the sender LP has no optimum".into(), trace);
    };
    trace.optimal_sender_utility = best.clone();
    let mut optimal = PersuasionLp::new(&instance);
    optimal.constrain(optimal.sender_utility(&instance), Relation::Eq, best);
    let pinned = |lp: &PersuasionLp, c: &[BigRational]| -> Option<BigRational> {
        let lo = lp.minimize(c)?;
        (lp.maximize(c)? == lo).then_some(lo)
    };
    if pinned(&optimal, &optimal.recommendation(A)) != Some(max_a.clone())
        || pinned(&optimal, &optimal.recommendation(B)) != Some(max_b.clone())
    {
        return v.stop("optimal schemes do not all share Pr[A] and Pr[B]".into(), trace);
    }

    // Step 1.
    let given_a1 = &max_a / f(A, T1);
    v.push(format!(
        "A is never recommended with type 2, so every optimal scheme recommends A with probability {given_a1} given type 1 (Pr[A] = {max_a}, Pr[B] = {max_b})"
    ));

    // Step 2.
    let forced_a = optimal.matching(|t| t[A] == T1 && t[C] == T1);
    for &k in &forced_a {
        let c = unit(&optimal, k, A);
        if optimal.minimize(&c) != Some(BigRational::one()) {
            return v.stop(format!("A is not forced on profile {:?}", optimal.profiles()[k].types), trace);
        }
    }
    v.push("every optimal scheme recommends A on (1,*,1), whatever the type of B".into());

    // Step 3.
    let mut dominance = Dominance::default();
    for &k in &forced_a {
        let t = &optimal.profiles()[k].types;
        dominance.above.insert((die(A, T1), die(B, t[B])));
    }
    v.push(format!("all faces of {} exceed all faces of {} and {}", die(A, T1), die(B, T1), die(B, T2)));

    // Step 4.
    let a1_profiles = optimal.matching(|t| t[A] == T1);
    let mut dice = optimal;
    for &k in &a1_profiles {
        let b = dice.profiles()[k].types[B];
        if dominance.above.contains(&(die(A, T1), die(B, b))) {
            dice.fix(k, B, BigRational::zero());
        }
    }
    v.push("B is never recommended when A has type 1, in particular on (1,*,2)".into());

    // Step 5.
    let on_12 = |t: &[usize]| t[A] == T1 && t[C] == T2;
    let mass_12 = f(A, T1) * f(C, T2);
    let (Some(pa), Some(pc)) = (
        pinned(&dice, &dice.restricted(A, on_12)),
        pinned(&dice, &dice.restricted(C, on_12)),
    ) else {
        return v.stop("recommendations on (1,*,2) are not pinned down".into(), trace);
    };
    let (pa, pc) = (pa / &mass_12, pc / &mass_12);
    if pc.is_zero() || pa + &pc != BigRational::one() {
        return v.stop("C is not recommended with positive probability on (1,*,2)".into(), trace);
    }
    dominance.beats.insert((die(C, T2), die(A, T1)));
    dominance.close();
    v.push(format!(
        "on (1,*,2) A and C are each recommended with probability {pc}, so {} beats {} with positive probability",
        die(C, T2),
        die(B, T1)
    ));

    // Step 6.
    let b_allowed = dice.matching(|t| t[A] == T2 && t[B] == T1);
    let allowed_mass: BigRational = b_allowed.iter().map(|&k| dice.profiles()[k].prob.clone()).sum();
    if allowed_mass != max_b {
        return v.stop("B's admissible profiles do not carry exactly Pr[B]".into(), trace);
    }
    for &k in &b_allowed {
        if dice.minimize(&unit(&dice, k, B)) != Some(BigRational::one()) {
            return v.stop(format!("B is not forced on profile {:?}", dice.profiles()[k].types), trace);
        }
    }
    v.push("B is always recommended on (2,1,*)".into());

    // Step 7.
    for &k in &b_allowed {
        let t = &dice.profiles()[k].types;
        dominance.above.insert((die(B, T1), die(C, t[C])));
    }
    dominance.close();
    v.push(format!("all faces of {} exceed all faces of {} and {}", die(B, T1), die(C, T1), die(C, T2)));

    // Step 8.
    let conflicts = dominance.conflicts();
    trace.dominance = dominance;
    let Some((x, y)) = conflicts.first().copied() else {
        return v.stop("no conflict between the derived orderings".into(), trace);
    };
    v.push(format!(
        "{x} must beat {y} with positive probability (step 5), but every face of {y} exceeds every face of {x} (step 7)"
    ));
    Table1Trace {
        steps: v.steps,
        status: TraceStatus::Contradiction,
        ..trace
    }
}

fn unit(lp: &PersuasionLp, profile: usize, action: usize) -> Vec<BigRational> {
    let mut c = lp.restricted(action, |_| false);
    c[lp.var(profile, action)] = BigRational::one();
    c
}
