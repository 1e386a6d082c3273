//! Direct schemes, their second-order interim rules and persuasiveness.

use num::{BigRational, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::instance::{Instance, Payoff};

/// Randomized recommendation per type profile: `probs[k][i]` is the
/// probability of recommending action `i` on profile `k` (profiles in the
/// order of [`Instance::profiles`]). Any remaining mass recommends nothing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scheme {
    probs: Vec<Vec<BigRational>>,
}

impl Scheme {
    pub fn new(instance: &Instance, probs: Vec<Vec<BigRational>>) -> Result<Self> {
        let profiles = instance.profiles();
        if probs.len() != profiles.len() {
            return Err(Error::Domain(format!(
                "scheme covers {} profiles, instance has {}",
                probs.len(),
                profiles.len()
            )));
        }
        for (row, profile) in probs.iter().zip(&profiles) {
            if row.len() != instance.len() {
                return Err(Error::Domain(format!(
                    "scheme row for profile {:?} has {} entries for {} actions",
                    profile.types,
                    row.len(),
                    instance.len()
                )));
            }
            if row.iter().any(Signed::is_negative) {
                return Err(Error::Domain(format!("negative probability on profile {:?}", profile.types)));
            }
            let total: BigRational = row.iter().cloned().sum();
            if total > BigRational::one() {
                return Err(Error::Domain(format!(
                    "recommendations on profile {:?} sum to {total} > 1",
                    profile.types
                )));
            }
        }
        Ok(Scheme { probs })
    }

    /// Builds a scheme from a function of the type profile.
    pub fn from_fn(instance: &Instance, mut rule: impl FnMut(&[usize]) -> Vec<BigRational>) -> Result<Self> {
        let probs = instance.profiles().iter().map(|p| rule(&p.types)).collect();
        Self::new(instance, probs)
    }

    pub fn probs(&self) -> &[Vec<BigRational>] {
        &self.probs
    }

    pub fn prob(&self, profile: usize, action: usize) -> &BigRational {
        &self.probs[profile][action]
    }

    /// Overall probability that each action is recommended.
    pub fn recommendation_probabilities(&self, instance: &Instance) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); instance.len()];
        for (row, profile) in self.probs.iter().zip(instance.profiles()) {
            for (acc, p) in out.iter_mut().zip(row) {
                *acc += &profile.prob * p;
            }
        }
        out
    }
}

/// `x[i][j][t] = Pr[action i recommended | action j has type t]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecondOrderRule {
    pub x: Vec<Vec<Vec<BigRational>>>,
}

impl SecondOrderRule {
    pub fn get(&self, winner: usize, given: usize, t: usize) -> &BigRational {
        &self.x[winner][given][t]
    }

    /// The diagonal `x[i][i]`: the first-order interim rule.
    pub fn first_order(&self) -> Vec<Vec<BigRational>> {
        (0..self.x.len()).map(|i| self.x[i][i].clone()).collect()
    }
}

/// Exact second-order interim rule of `scheme`. Conditioning on a type of
/// prior probability zero yields 0.
pub fn second_order_from_scheme(instance: &Instance, scheme: &Scheme) -> SecondOrderRule {
    let n = instance.len();
    let counts = instance.type_counts();
    let mut x: Vec<Vec<Vec<BigRational>>> = (0..n)
        .map(|_| counts.iter().map(|&k| vec![BigRational::zero(); k]).collect())
        .collect();
    for (row, profile) in scheme.probs.iter().zip(instance.profiles()) {
        for (i, p) in row.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let mass = &profile.prob * p;
            for (j, &t) in profile.types.iter().enumerate() {
                x[i][j][t] += &mass;
            }
        }
    }
    for row in x.iter_mut() {
        for (j, given) in row.iter_mut().enumerate() {
            for (t, v) in given.iter_mut().enumerate() {
                let f = &instance.action_type(j, t).prob;
                *v = if f.is_zero() { BigRational::zero() } else { &*v / f };
            }
        }
    }
    SecondOrderRule { x }
}

/// Outcome of a persuasiveness check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PersuasionCheck {
    pub persuasive: bool,
    /// `(recommended, alternative)` pairs where the receiver strictly prefers
    /// the alternative.
    pub violations: Vec<(usize, usize)>,
}

/// Posterior receiver utility, unnormalized: `None` is minus infinity.
fn posterior_utility(instance: &Instance, scheme: &Scheme, rec: usize, action: usize) -> Option<BigRational> {
    let mut total = BigRational::zero();
    for (row, profile) in scheme.probs.iter().zip(instance.profiles()) {
        let weight = &profile.prob * &row[rec];
        if weight.is_zero() {
            continue;
        }
        match &instance.action_type(action, profile.types[action]).receiver {
            Payoff::Finite(r) => total += weight * r,
            Payoff::NegInf => return None,
        }
    }
    Some(total)
}

/// Checks that following every recommendation made with positive probability
/// maximizes the receiver's posterior expected utility, using exact
/// posteriors. A recommendation whose posterior utility is minus infinity
/// violates persuasiveness against every alternative.
pub fn check_persuasive(instance: &Instance, scheme: &Scheme) -> PersuasionCheck {
    let n = instance.len();
    let totals = scheme.recommendation_probabilities(instance);
    let mut violations = Vec::new();
    for (rec, total) in totals.iter().enumerate() {
        if total.is_zero() {
            continue;
        }
        let own = posterior_utility(instance, scheme, rec, rec);
        let Some(own) = own else {
            if n == 1 {
                violations.push((rec, rec));
            }
            violations.extend((0..n).filter(|&j| j != rec).map(|j| (rec, j)));
            continue;
        };
        for alt in (0..n).filter(|&j| j != rec) {
            if let Some(other) = posterior_utility(instance, scheme, rec, alt) {
                if other > own {
                    violations.push((rec, alt));
                }
            }
        }
    }
    PersuasionCheck {
        persuasive: violations.is_empty(),
        violations,
    }
}

/// For a symmetric scheme on `n` i.i.d. actions that always recommends some
/// action, the off-diagonal entries are `z = (1 − y) / (n − 1)`.
pub fn symmetric_second_order(n: usize, y: &[BigRational]) -> Result<(Vec<BigRational>, Vec<BigRational>)> {
    if n < 2 {
        return Err(Error::Domain("a symmetric second-order rule needs at least two actions".into()));
    }
    if let Some(v) = y.iter().find(|v| v.is_negative() || **v > BigRational::one()) {
        return Err(Error::Domain(format!("first-order value {v} is outside [0, 1]")));
    }
    let den = BigRational::from_integer((n as i64 - 1).into());
    let z = y.iter().map(|v| (BigRational::one() - v) / &den).collect();
    Ok((y.to_vec(), z))
}

/// The symmetric second-order rule on `n` actions with first-order component `y`.
pub fn symmetric_rule(n: usize, y: &[BigRational]) -> Result<SecondOrderRule> {
    let (y, z) = symmetric_second_order(n, y)?;
    let x = (0..n)
        .map(|i| (0..n).map(|j| if i == j { y.clone() } else { z.clone() }).collect())
        .collect();
    Ok(SecondOrderRule { x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Action, ActionType};
    use crate::table1::{table1_instance, table1_scheme};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn always_first_action() {
        let inst = table1_instance();
        let scheme = Scheme::from_fn(&inst, |_| vec![q(1, 1), q(0, 1), q(0, 1)]).unwrap();
        let x = second_order_from_scheme(&inst, &scheme);
        for j in 0..3 {
            for t in 0..2 {
                assert!(x.get(0, j, t).is_one());
                assert!(x.get(1, j, t).is_zero());
            }
        }
    }

    #[test]
    fn uniform_recommendation() {
        let inst = table1_instance();
        let scheme = Scheme::from_fn(&inst, |_| vec![q(1, 3); 3]).unwrap();
        let x = second_order_from_scheme(&inst, &scheme);
        assert!(x.x.iter().flatten().flatten().all(|v| *v == q(1, 3)));
    }

    #[test]
    fn table1_scheme_values() {
        let inst = table1_instance();
        let scheme = table1_scheme(&inst);
        let x = second_order_from_scheme(&inst, &scheme);
        assert_eq!(*x.get(0, 0, 0), q(3, 4));
        assert!(x.get(0, 0, 1).is_zero());
        let check = check_persuasive(&inst, &scheme);
        assert!(check.persuasive, "{check:?}");
    }

    #[test]
    fn recommending_a_on_type_two_is_not_persuasive() {
        let inst = table1_instance();
        let base = table1_scheme(&inst);
        let scheme = Scheme::from_fn(&inst, |types| {
            if types[0] == 1 {
                vec![q(1, 1), q(0, 1), q(0, 1)]
            } else {
                base.probs()[inst.profile_index(types)].clone()
            }
        })
        .unwrap();
        let check = check_persuasive(&inst, &scheme);
        assert!(!check.persuasive);
        assert!(check.violations.contains(&(0, 2)));
    }

    #[test]
    fn single_action() {
        let inst = Instance::new(vec![Action {
            name: "only".into(),
            types: vec![ActionType {
                name: "t".into(),
                prob: q(1, 1),
                sender: q(1, 1),
                receiver: Payoff::Finite(q(1, 1)),
            }],
        }])
        .unwrap();
        let scheme = Scheme::from_fn(&inst, |_| vec![q(1, 1)]).unwrap();
        assert!(check_persuasive(&inst, &scheme).persuasive);
    }

    #[test]
    fn symmetric_examples() {
        let (_, z) = symmetric_second_order(2, &[q(1, 1)]).unwrap();
        assert!(z[0].is_zero());
        let (_, z) = symmetric_second_order(3, &[q(2, 5)]).unwrap();
        assert_eq!(z[0], q(3, 10));
        let (_, z) = symmetric_second_order(4, &[q(1, 4)]).unwrap();
        assert_eq!(z[0], q(1, 4));
        assert!(symmetric_second_order(1, &[q(1, 1)]).is_err());
        let rule = symmetric_rule(3, &[q(2, 5)]).unwrap();
        assert_eq!(*rule.get(0, 2, 0), q(3, 10));
        assert_eq!(rule.first_order()[1], vec![q(2, 5)]);
    }
}
