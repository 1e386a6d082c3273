//! Winner-selection environments: candidates, their types, independent priors
//! and the winner-set constraint.

use std::fmt;

use num::BigRational;

use crate::error::{domain, Error, Result};
use crate::matroid::{Constraint, Matroid, BRUTE_FORCE_LIMIT};
use crate::numeric::{poisson_binomial, Scalar};
use crate::sets::{CandSet, TypeSet, MAX_CANDIDATES, MAX_TYPES};

/// A type, identified by its candidate and its position among that candidate's types.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId {
    pub candidate: usize,
    pub local: usize,
}

impl fmt::Display for TypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.candidate, self.local)
    }
}

/// Assignment of global type indices to candidates. Types of candidate `i`
/// occupy the contiguous range `offsets[i]..offsets[i + 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeLayout {
    names: Vec<Vec<String>>,
    offsets: Vec<usize>,
    owner: Vec<usize>,
}

impl TypeLayout {
    pub fn new(names: Vec<Vec<String>>) -> Result<Self> {
        if names.len() > MAX_CANDIDATES {
            return Err(Error::Capacity {
                what: "candidate count",
                limit: MAX_CANDIDATES,
                actual: names.len(),
                hint: "",
            });
        }
        let mut offsets = vec![0];
        let mut owner = Vec::new();
        for (i, types) in names.iter().enumerate() {
            if types.is_empty() {
                return Err(domain(format!("candidate {i} has no types")));
            }
            for (j, name) in types.iter().enumerate() {
                if types[..j].contains(name) {
                    return Err(domain(format!("candidate {i} repeats type name {name:?}")));
                }
            }
            owner.extend(std::iter::repeat_n(i, types.len()));
            offsets.push(owner.len());
        }
        if owner.len() > MAX_TYPES {
            return Err(Error::Capacity {
                what: "total type count",
                limit: MAX_TYPES,
                actual: owner.len(),
                hint: "",
            });
        }
        Ok(TypeLayout {
            names,
            offsets,
            owner,
        })
    }

    /// Layout where candidate `i` has `counts[i]` types named `"0"`, `"1"`, ...
    pub fn with_counts(counts: &[usize]) -> Result<Self> {
        Self::new(
            counts
                .iter()
                .map(|&k| (0..k).map(|j| j.to_string()).collect())
                .collect(),
        )
    }

    pub fn candidates(&self) -> usize {
        self.names.len()
    }

    pub fn types(&self) -> usize {
        self.owner.len()
    }

    pub fn owner(&self, t: usize) -> usize {
        self.owner[t]
    }

    pub fn id(&self, t: usize) -> TypeId {
        let candidate = self.owner[t];
        TypeId {
            candidate,
            local: t - self.offsets[candidate],
        }
    }

    pub fn index(&self, id: TypeId) -> Option<usize> {
        let range = self.range(id.candidate)?;
        let t = range.start + id.local;
        (t < range.end).then_some(t)
    }

    pub fn range(&self, candidate: usize) -> Option<std::ops::Range<usize>> {
        (candidate < self.names.len())
            .then(|| self.offsets[candidate]..self.offsets[candidate + 1])
    }

    pub fn types_of(&self, candidate: usize) -> TypeSet {
        let range = self.offsets[candidate]..self.offsets[candidate + 1];
        TypeSet::from_indices(range)
    }

    pub fn all_types(&self) -> TypeSet {
        TypeSet::full(self.types())
    }

    pub fn name(&self, t: usize) -> &str {
        let id = self.id(t);
        &self.names[id.candidate][id.local]
    }

    pub fn names(&self) -> &[Vec<String>] {
        &self.names
    }

    /// Key of the form `"<candidate>:<type name>"` used in data files.
    pub fn key(&self, t: usize) -> String {
        format!("{}:{}", self.owner[t], self.name(t))
    }

    pub fn lookup(&self, key: &str) -> Option<usize> {
        let (cand, name) = key.split_once(':')?;
        let cand: usize = cand.trim().parse().ok()?;
        let local = self.names.get(cand)?.iter().position(|n| n == name)?;
        Some(self.offsets[cand] + local)
    }

    /// Candidates owning at least one type of `set`.
    pub fn candidates_of(&self, set: TypeSet) -> CandSet {
        CandSet::from_indices(set.iter().map(|t| self.owner[t]))
    }

    pub fn describe(&self, set: TypeSet) -> String {
        let keys: Vec<String> = set.iter().map(|t| self.key(t)).collect();
        format!("{{{}}}", keys.join(", "))
    }
}

/// Independent priors over each candidate's types together with the winner-set
/// constraint. Prior entries are indexed by global type index.
#[derive(Clone, Debug, PartialEq)]
pub struct Environment<S> {
    layout: TypeLayout,
    prior: Vec<S>,
    constraint: Constraint,
}

impl<S: Scalar> Environment<S> {
    pub fn new(layout: TypeLayout, prior: Vec<S>, constraint: Constraint) -> Result<Self> {
        if prior.len() != layout.types() {
            return Err(domain(format!(
                "prior has {} entries for {} types",
                prior.len(),
                layout.types()
            )));
        }
        if constraint.ground_size() != layout.candidates() {
            return Err(domain(format!(
                "constraint ground set has {} candidates, environment has {}",
                constraint.ground_size(),
                layout.candidates()
            )));
        }
        for i in 0..layout.candidates() {
            let range = layout.range(i).expect("candidate in range");
            let mut total = S::zero();
            for t in range {
                if prior[t] < S::zero() {
                    return Err(domain(format!(
                        "type {} has negative probability {}",
                        layout.key(t),
                        prior[t]
                    )));
                }
                total = total + prior[t].clone();
            }
            if (total.clone() - S::one()).abs() > S::sum_tolerance() {
                return Err(domain(format!(
                    "type probabilities of candidate {i} sum to {total}, not 1"
                )));
            }
        }
        Ok(Environment {
            layout,
            prior,
            constraint,
        })
    }

    /// Environment given per-candidate probability vectors and default type names.
    pub fn from_priors(priors: Vec<Vec<S>>, constraint: Constraint) -> Result<Self> {
        let counts: Vec<usize> = priors.iter().map(Vec::len).collect();
        let layout = TypeLayout::with_counts(&counts)?;
        Self::new(layout, priors.into_iter().flatten().collect(), constraint)
    }

    /// Single-winner environment from per-candidate probability vectors.
    pub fn single_winner(priors: Vec<Vec<S>>) -> Result<Self> {
        let n = priors.len();
        Self::from_priors(priors, Constraint::Matroid(Matroid::single_winner(n)?))
    }

    /// `n` candidates, each with a single type that is always present.
    pub fn always_present(n: usize, constraint: Constraint) -> Result<Self> {
        Self::from_priors(vec![vec![S::one()]; n], constraint)
    }

    pub fn layout(&self) -> &TypeLayout {
        &self.layout
    }

    pub fn prior(&self) -> &[S] {
        &self.prior
    }

    pub fn f(&self, t: usize) -> &S {
        &self.prior[t]
    }

    pub fn constraint(&self) -> &Constraint {
        &self.constraint
    }

    pub fn matroid(&self) -> Option<&Matroid> {
        self.constraint.as_matroid()
    }

    pub fn is_single_winner(&self) -> bool {
        self.constraint.is_single_winner()
    }

    pub fn candidates(&self) -> usize {
        self.layout.candidates()
    }

    pub fn types(&self) -> usize {
        self.layout.types()
    }

    pub fn owner(&self, t: usize) -> usize {
        self.layout.owner(t)
    }

    /// Same environment with a different prior (validated).
    pub fn with_prior(&self, prior: Vec<S>) -> Result<Self> {
        Self::new(self.layout.clone(), prior, self.constraint.clone())
    }

    /// Same environment with a different constraint.
    pub fn with_constraint(&self, constraint: Constraint) -> Result<Self> {
        Self::new(self.layout.clone(), self.prior.clone(), constraint)
    }

    /// Probability that candidate `i` realizes a type in `set`.
    pub fn presence(&self, candidate: usize, set: TypeSet) -> S {
        set.intersection(self.layout.types_of(candidate))
            .iter()
            .fold(S::zero(), |acc, t| acc + self.prior[t].clone())
    }

    /// Per-candidate presence probabilities of `set`.
    pub fn presences(&self, set: TypeSet) -> Vec<S> {
        let mut out = vec![S::zero(); self.candidates()];
        for t in set.iter() {
            let i = self.layout.owner(t);
            out[i] = out[i].clone() + self.prior[t].clone();
        }
        out
    }

    /// Probability that some candidate realizes a type in `set`:
    /// `1 − Π_i (1 − f(S_i))`.
    pub fn f_of_set(&self, set: TypeSet) -> S {
        let absent = self
            .presences(set)
            .into_iter()
            .fold(S::one(), |acc, p| acc * (S::one() - p));
        S::one() - absent
    }

    /// Expected rank of the candidates realizing a type in `set`.
    pub fn expected_rank(&self, set: TypeSet) -> Result<S> {
        if !set.is_subset(self.layout.all_types()) {
            return Err(domain(format!("type set {set:?} is out of range")));
        }
        let p = self.presences(set);
        match &self.constraint {
            Constraint::Matroid(Matroid::Uniform { k, .. }) => Ok(capped_mean(&p, *k)),
            Constraint::Matroid(Matroid::Partition { blocks, caps, .. }) => {
                let mut total = S::zero();
                for (block, &cap) in blocks.iter().zip(caps) {
                    let params: Vec<S> = block.iter().map(|c| p[c].clone()).collect();
                    total = total + capped_mean(&params, cap);
                }
                Ok(total)
            }
            constraint => {
                let mut certain = CandSet::EMPTY;
                let mut uncertain = Vec::new();
                for (c, pc) in p.iter().enumerate() {
                    if pc.is_zero() {
                        continue;
                    }
                    if pc.is_one() {
                        certain = certain.with(c);
                    } else {
                        uncertain.push(c);
                    }
                }
                if uncertain.len() > BRUTE_FORCE_LIMIT {
                    return Err(Error::Capacity {
                        what: "candidates with uncertain presence",
                        limit: BRUTE_FORCE_LIMIT,
                        actual: uncertain.len(),
                        hint: "",
                    });
                }
                let mut total = S::zero();
                for mask in 0u32..(1u32 << uncertain.len()) {
                    let mut weight = S::one();
                    let mut present = certain;
                    for (bit, &c) in uncertain.iter().enumerate() {
                        if mask >> bit & 1 == 1 {
                            weight = weight * p[c].clone();
                            present = present.with(c);
                        } else {
                            weight = weight * (S::one() - p[c].clone());
                        }
                    }
                    let r = constraint.rank(present)?;
                    total = total + weight * S::from_count(r);
                }
                Ok(total)
            }
        }
    }

    /// Checks that `x` has one entry per type, each in `[0, 1]`.
    pub fn check_interim(&self, x: &[S]) -> Result<()> {
        if x.len() != self.types() {
            return Err(domain(format!(
                "interim rule has {} entries for {} types",
                x.len(),
                self.types()
            )));
        }
        for (t, v) in x.iter().enumerate() {
            if *v < S::zero() || *v > S::one() {
                return Err(domain(format!(
                    "interim probability of {} is {v}, outside [0, 1]",
                    self.layout.key(t)
                )));
            }
        }
        Ok(())
    }

    /// The same environment with double-precision priors.
    pub fn to_f64(&self) -> Environment<f64> {
        Environment {
            layout: self.layout.clone(),
            prior: self.prior.iter().map(Scalar::to_f64_lossy).collect(),
            constraint: self.constraint.clone(),
        }
    }
}

impl Environment<f64> {
    /// The same environment with priors read as exact rationals (shortest
    /// decimal reading of each double). Each candidate's prior must sum to one
    /// exactly after conversion.
    pub fn to_rational(&self) -> Result<Environment<BigRational>> {
        Environment::new(
            self.layout.clone(),
            self.prior
                .iter()
                .map(|&v| BigRational::from_f64_lossy(v))
                .collect(),
            self.constraint.clone(),
        )
    }
}

fn capped_mean<S: Scalar>(params: &[S], cap: usize) -> S {
    poisson_binomial(params)
        .into_iter()
        .enumerate()
        .fold(S::zero(), |acc, (count, mass)| {
            acc + mass * S::from_count(count.min(cap))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rational;

    fn uniform(n: usize, k: usize) -> Constraint {
        Constraint::Matroid(Matroid::uniform(n, k).unwrap())
    }

    #[test]
    fn layout_keys_round_trip() {
        let layout = TypeLayout::new(vec![
            vec!["lo".into(), "hi".into()],
            vec!["only".into()],
        ])
        .unwrap();
        assert_eq!(layout.types(), 3);
        assert_eq!(layout.key(1), "0:hi");
        assert_eq!(layout.lookup("1:only"), Some(2));
        assert_eq!(layout.lookup("1:hi"), None);
        assert_eq!(layout.id(2), TypeId { candidate: 1, local: 0 });
        assert_eq!(layout.index(TypeId { candidate: 0, local: 1 }), Some(1));
    }

    #[test]
    fn prior_validation() {
        assert!(Environment::single_winner(vec![vec![0.5, 0.4]]).is_err());
        assert!(Environment::single_winner(vec![vec![1.5, -0.5]]).is_err());
        assert!(Environment::single_winner(vec![vec![0.5, 0.5]]).is_ok());
    }

    #[test]
    fn expected_rank_examples() {
        let env = Environment::single_winner(vec![vec![0.5, 0.5]]).unwrap();
        assert_eq!(env.expected_rank(TypeSet::singleton(0)).unwrap(), 0.5);
        assert_eq!(env.expected_rank(TypeSet::EMPTY).unwrap(), 0.0);
        let env = Environment::<f64>::always_present(3, uniform(3, 2)).unwrap();
        assert_eq!(env.expected_rank(TypeSet::full(3)).unwrap(), 2.0);
    }

    #[test]
    fn explicit_path_matches_closed_forms() {
        let priors = vec![
            vec![rational(1, 3), rational(2, 3)],
            vec![rational(1, 4), rational(3, 4)],
            vec![rational(1, 2), rational(1, 2)],
        ];
        let env = Environment::from_priors(priors, uniform(3, 2)).unwrap();
        let sets: Vec<Vec<usize>> = vec![vec![0, 1], vec![0, 2], vec![1, 2]];
        let explicit = env
            .with_constraint(Constraint::Matroid(Matroid::explicit(3, &sets).unwrap()))
            .unwrap();
        for set in env.layout().all_types().subsets() {
            assert_eq!(
                env.expected_rank(set).unwrap(),
                explicit.expected_rank(set).unwrap()
            );
        }
        let single = env
            .with_constraint(uniform(3, 1))
            .unwrap();
        for set in env.layout().all_types().subsets() {
            assert_eq!(single.expected_rank(set).unwrap(), single.f_of_set(set));
        }
    }
}
