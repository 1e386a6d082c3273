//! Dice (finite score distributions, one per type) and greedy winner selection.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::env::Environment;
use crate::error::{domain, Result};
use crate::matroid::Constraint;
use crate::numeric::Scalar;
use crate::sets::CandSet;

/// Face value standing in for a score that can never win.
pub const LOSING_FACE: f64 = -1.0;

/// A finite distribution over real face values. Faces are kept sorted by value
/// with equal values merged.
#[derive(Clone, Debug, PartialEq)]
pub struct Die<S> {
    faces: Vec<(f64, S)>,
}

impl<S: Scalar> Die<S> {
    /// Validates and canonicalizes a list of `(value, probability)` pairs.
    pub fn new(faces: Vec<(f64, S)>) -> Result<Self> {
        let mut total = S::zero();
        for (value, prob) in &faces {
            if !value.is_finite() {
                return Err(domain(format!("die face value {value} is not finite")));
            }
            if *prob < S::zero() {
                return Err(domain(format!("die face {value} has negative probability {prob}")));
            }
            total = total + prob.clone();
        }
        if (total.clone() - S::one()).abs() > S::sum_tolerance() {
            return Err(domain(format!("die face probabilities sum to {total}, not 1")));
        }
        Ok(Self::canonical(faces))
    }

    /// Canonicalizes without validation.
    pub(crate) fn canonical(mut faces: Vec<(f64, S)>) -> Self {
        faces.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, S)> = Vec::with_capacity(faces.len());
        for (value, prob) in faces {
            if prob.is_zero() {
                continue;
            }
            match merged.last_mut() {
                Some((v, p)) if *v == value => *p = p.clone() + prob,
                _ => merged.push((value, prob)),
            }
        }
        if merged.is_empty() {
            merged.push((LOSING_FACE, S::one()));
        }
        Die { faces: merged }
    }

    /// A die that always shows `value`.
    pub fn point(value: f64) -> Self {
        Die {
            faces: vec![(value, S::one())],
        }
    }

    /// Shows `value` with probability `p` and the losing face otherwise.
    pub fn two_sided(value: f64, p: S) -> Self {
        let rest = S::one() - p.clone();
        Self::canonical(vec![(value, p), (LOSING_FACE, rest)])
    }

    pub fn faces(&self) -> &[(f64, S)] {
        &self.faces
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn max_value(&self) -> f64 {
        self.faces.last().map_or(LOSING_FACE, |f| f.0)
    }

    pub fn prob_of(&self, value: f64) -> S {
        self.faces
            .iter()
            .find(|f| f.0 == value)
            .map_or_else(S::zero, |f| f.1.clone())
    }

    /// Probability of a strictly positive face.
    pub fn positive_mass(&self) -> S {
        self.faces
            .iter()
            .filter(|f| f.0 > 0.0)
            .fold(S::zero(), |acc, f| acc + f.1.clone())
    }

    pub fn to_f64(&self) -> Die<f64> {
        Die {
            faces: self
                .faces
                .iter()
                .map(|(v, p)| (*v, p.to_f64_lossy()))
                .collect(),
        }
    }

    /// Applies a strictly increasing map to every face value.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::canonical(self.faces.iter().map(|(v, p)| (f(*v), p.clone())).collect())
    }
}

/// One die per type, indexed by global type index.
#[derive(Clone, Debug, PartialEq)]
pub struct DiceSystem<S> {
    pub dice: Vec<Die<S>>,
}

impl<S: Scalar> DiceSystem<S> {
    pub fn new(dice: Vec<Die<S>>) -> Self {
        DiceSystem { dice }
    }

    pub fn check_against(&self, env: &Environment<S>) -> Result<()> {
        if self.dice.len() != env.types() {
            return Err(domain(format!(
                "dice system has {} dice for {} types",
                self.dice.len(),
                env.types()
            )));
        }
        Ok(())
    }

    pub fn to_f64(&self) -> DiceSystem<f64> {
        DiceSystem {
            dice: self.dice.iter().map(Die::to_f64).collect(),
        }
    }

    pub fn max_faces(&self) -> usize {
        self.dice.iter().map(Die::len).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionOutcome {
    pub winners: CandSet,
    pub scores: Vec<f64>,
}

/// Selects winners given a fixed tie-break priority (`priority[c]` smaller means
/// processed earlier among equal scores). Under a matroid this is the greedy
/// rule; under a general family it picks the feasible set of positive-score
/// candidates with largest total score, preferring sets that contain
/// earlier-processed candidates.
pub fn select_with_priority(
    constraint: &Constraint,
    scores: &[f64],
    priority: &[usize],
) -> SelectionOutcome {
    let mut order: Vec<usize> = (0..scores.len()).filter(|&c| scores[c] > 0.0).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then(priority[a].cmp(&priority[b]))
    });
    let winners = match constraint {
        Constraint::Matroid(m) => {
            let mut chosen = CandSet::EMPTY;
            for &c in &order {
                if m.is_independent(chosen.with(c)) {
                    chosen = chosen.with(c);
                }
            }
            chosen
        }
        Constraint::Family(family) => {
            let positive = CandSet::from_indices(order.iter().copied());
            let mut best = CandSet::EMPTY;
            let mut best_sum = 0.0;
            for set in positive.subsets() {
                if !family.contains(set) {
                    continue;
                }
                let sum: f64 = set.iter().map(|c| scores[c]).sum();
                let better = match sum.total_cmp(&best_sum) {
                    Ordering::Greater => true,
                    Ordering::Less => false,
                    Ordering::Equal => earlier_members(&order, set, best),
                };
                if better {
                    best = set;
                    best_sum = sum;
                }
            }
            best
        }
    };
    SelectionOutcome {
        winners,
        scores: scores.to_vec(),
    }
}

// Whether `a` beats `b` comparing membership along the processing order.
fn earlier_members(order: &[usize], a: CandSet, b: CandSet) -> bool {
    for &c in order {
        match (a.contains(c), b.contains(c)) {
            (true, false) => return true,
            (false, true) => return false,
            _ => {}
        }
    }
    false
}

/// Greedy selection with ties broken by a uniformly random order.
pub fn greedy_select<R: Rng + ?Sized>(
    constraint: &Constraint,
    scores: &[f64],
    rng: &mut R,
) -> SelectionOutcome {
    let mut priority: Vec<usize> = (0..scores.len()).collect();
    priority.shuffle(rng);
    select_with_priority(constraint, scores, &priority)
}
