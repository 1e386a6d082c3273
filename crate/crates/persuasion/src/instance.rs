//! Persuasion instances: actions with independent types carrying sender and
//! receiver payoffs.

use num::{BigRational, One, Signed, Zero};

use crate::error::{Error, Result};

/// Largest number of type profiles enumerated exactly.
pub const MAX_PROFILES: u128 = 1_000_000;

/// Receiver payoff. `NegInf` marks a type under which the action is never
/// worth taking, whatever else is known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payoff {
    Finite(BigRational),
    NegInf,
}

impl Payoff {
    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            Payoff::Finite(v) => Some(v),
            Payoff::NegInf => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionType {
    pub name: String,
    pub prob: BigRational,
    pub sender: BigRational,
    pub receiver: Payoff,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    pub name: String,
    pub types: Vec<ActionType>,
}

/// Actions with independent type distributions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    actions: Vec<Action>,
}

/// A full type profile with its prior probability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Profile {
    pub types: Vec<usize>,
    pub prob: BigRational,
}

impl Instance {
    pub fn new(actions: Vec<Action>) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::Domain("instance has no actions".into()));
        }
        for action in &actions {
            if action.types.is_empty() {
                return Err(Error::Domain(format!("action {} has no types", action.name)));
            }
            let mut total = BigRational::zero();
            for t in &action.types {
                if t.prob.is_negative() {
                    return Err(Error::Domain(format!(
                        "action {} type {} has negative probability",
                        action.name, t.name
                    )));
                }
                total += &t.prob;
            }
            if !total.is_one() {
                return Err(Error::Domain(format!(
                    "type probabilities of action {} sum to {total}, not 1",
                    action.name
                )));
            }
        }
        let count: u128 = actions.iter().map(|a| a.types.len() as u128).product();
        if count > MAX_PROFILES {
            return Err(Error::TooManyProfiles {
                actual: count,
                limit: MAX_PROFILES,
            });
        }
        Ok(Instance { actions })
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn type_counts(&self) -> Vec<usize> {
        self.actions.iter().map(|a| a.types.len()).collect()
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.name == name)
    }

    pub fn action_type(&self, action: usize, t: usize) -> &ActionType {
        &self.actions[action].types[t]
    }

    /// All type profiles in mixed-radix order (last action varies fastest).
    pub fn profiles(&self) -> Vec<Profile> {
        let counts = self.type_counts();
        let mut out = Vec::new();
        let mut types = vec![0usize; counts.len()];
        loop {
            let prob = types
                .iter()
                .enumerate()
                .fold(BigRational::one(), |acc, (i, &t)| acc * &self.actions[i].types[t].prob);
            out.push(Profile {
                types: types.clone(),
                prob,
            });
            let mut pos = counts.len();
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                types[pos] += 1;
                if types[pos] < counts[pos] {
                    break;
                }
                types[pos] = 0;
            }
        }
    }

    /// Position of `types` in the order of [`Instance::profiles`].
    pub fn profile_index(&self, types: &[usize]) -> usize {
        types
            .iter()
            .zip(self.type_counts())
            .fold(0, |acc, (&t, k)| acc * k + t)
    }
}
