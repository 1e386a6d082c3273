//! Winning probabilities of parameterized dice, integrated over primitive rolls
//! with randomized quasi-Monte-Carlo.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::env::Environment;
use crate::error::{domain, Error, Result};
use crate::matroid::Matroid;
use crate::sets::{CandSet, TypeSet};

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Largest number of types in one parameterized layer.
pub const MAX_LAYER_TYPES: usize = 8;

/// Fixed Exponential(1) primitive rolls: a Halton sequence under several
/// independent Cranley-Patterson shifts. Reusing one plan across calls makes
/// the estimates a deterministic function of the dice parameters.
#[derive(Clone, Debug)]
pub struct QmcPlan {
    dims: usize,
    points: usize,
    shifts: usize,
    rolls: Vec<f64>,
}

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while i > 0 {
        out += (i % b) as f64 * scale;
        i /= b;
        scale *= inv;
    }
    out
}

impl QmcPlan {
    pub fn new(dims: usize, points: usize, shifts: usize, seed: u64) -> Result<Self> {
        if dims == 0 || dims > PRIMES.len() {
            return Err(domain(format!("QMC dimension {dims} is outside 1..={}", PRIMES.len())));
        }
        if points == 0 || shifts < 2 {
            return Err(domain("QMC plan needs at least one point and two shifts"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rolls = Vec::with_capacity(dims * points * shifts);
        for _ in 0..shifts {
            let shift: Vec<f64> = (0..dims).map(|_| rng.random::<f64>()).collect();
            for i in 1..=points as u64 {
                for (d, s) in shift.iter().enumerate() {
                    let u = (radical_inverse(i, PRIMES[d]) + s).fract();
                    rolls.push(-(1.0 - u).ln());
                }
            }
        }
        Ok(QmcPlan {
            dims,
            points,
            shifts,
            rolls,
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn samples(&self) -> usize {
        self.points * self.shifts
    }

    fn shift_rolls(&self, shift: usize) -> impl Iterator<Item = &[f64]> {
        let block = self.points * self.dims;
        self.rolls[shift * block..(shift + 1) * block].chunks(self.dims)
    }
}

/// Probability that candidate `c` is not spanned by a random set `H` of other
/// candidates, where `j ∈ H` independently with probability `p[j]`.
#[derive(Clone, Debug)]
enum Blocking {
    Uniform(usize),
    Partition { block_of: Vec<usize>, caps: Vec<usize> },
    Table(Vec<u8>),
}

fn count_below(probs: impl Iterator<Item = f64>, cap: usize) -> f64 {
    if cap == 0 {
        return 0.0;
    }
    // dp[i] = Pr[exactly i members so far], tracked for i < cap.
    let mut dp = vec![0.0; cap];
    dp[0] = 1.0;
    for p in probs {
        if p <= 0.0 {
            continue;
        }
        for i in (0..cap).rev() {
            let stay = dp[i] * (1.0 - p);
            let from = if i > 0 { dp[i - 1] * p } else { 0.0 };
            dp[i] = stay + from;
        }
    }
    dp.iter().sum()
}

impl Blocking {
    fn new(matroid: &Matroid) -> Result<Self> {
        Ok(match matroid {
            Matroid::Uniform { k, .. } => Blocking::Uniform(*k),
            Matroid::Partition {
                ground,
                blocks,
                caps,
            } => {
                let mut block_of = vec![0; *ground];
                for (b, block) in blocks.iter().enumerate() {
                    for c in block.iter() {
                        block_of[c] = b;
                    }
                }
                Blocking::Partition {
                    block_of,
                    caps: caps.clone(),
                }
            }
            Matroid::Explicit(_) => Blocking::Table(matroid.rank_table()?),
        })
    }

    fn free(&self, c: usize, p: &[f64]) -> f64 {
        match self {
            Blocking::Uniform(k) => count_below(
                p.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &v)| v),
                *k,
            ),
            Blocking::Partition { block_of, caps } => {
                let b = block_of[c];
                count_below(
                    p.iter()
                        .enumerate()
                        .filter(|&(j, _)| j != c && block_of[j] == b)
                        .map(|(_, &v)| v),
                    caps[b],
                )
            }
            Blocking::Table(rank) => {
                let mut certain = 0u32;
                let mut uncertain: Vec<(usize, f64)> = Vec::new();
                for (j, &v) in p.iter().enumerate() {
                    if j == c || v <= 0.0 {
                        continue;
                    }
                    if v >= 1.0 {
                        certain |= 1 << j;
                    } else {
                        uncertain.push((j, v));
                    }
                }
                let own = 1u32 << c;
                let mut total = 0.0;
                for mask in 0u32..(1 << uncertain.len()) {
                    let mut weight = 1.0;
                    let mut set = certain;
                    for (bit, &(j, v)) in uncertain.iter().enumerate() {
                        if mask >> bit & 1 == 1 {
                            weight *= v;
                            set |= 1 << j;
                        } else {
                            weight *= 1.0 - v;
                        }
                    }
                    if rank[(set | own) as usize] > rank[set as usize] {
                        total += weight;
                    }
                }
                total
            }
        }
    }
}

/// A group of types whose dice are `θ_t v_t − τ`, competing against fixed
/// higher-band types (which beat every layer face whenever their roll is
/// positive) and against nothing outside the group.
#[derive(Clone, Debug)]
pub struct Layer<'a> {
    env: &'a Environment<f64>,
    types: Vec<usize>,
    owner: Vec<usize>,
    inner: Vec<f64>,
    blocking: Blocking,
}

impl<'a> Layer<'a> {
    /// `inner[c]` is the probability that candidate `c` realizes a
    /// higher-band type with a positive roll.
    pub fn new(env: &'a Environment<f64>, types: TypeSet, inner: Vec<f64>) -> Result<Self> {
        let matroid = env
            .matroid()
            .ok_or_else(|| domain("the matroid solver needs a matroid constraint"))?;
        if types.is_empty() || types.len() > MAX_LAYER_TYPES {
            return Err(Error::Capacity {
                what: "types in one solver layer",
                limit: MAX_LAYER_TYPES,
                actual: types.len(),
                hint: "",
            });
        }
        if !types.is_subset(env.layout().all_types()) || inner.len() != env.candidates() {
            return Err(domain("layer types or inner masses do not match the environment"));
        }
        let types: Vec<usize> = types.iter().collect();
        Ok(Layer {
            env,
            owner: types.iter().map(|&t| env.owner(t)).collect(),
            types,
            inner,
            blocking: Blocking::new(matroid)?,
        })
    }

    pub fn types(&self) -> &[usize] {
        &self.types
    }

    pub fn candidates(&self) -> CandSet {
        CandSet::from_indices(self.owner.iter().copied())
    }

    // Sum of per-sample winning probabilities of each layer type. A type's own
    // roll is integrated exactly: between consecutive opposing scores the set
    // of candidates ahead of it is fixed, and its Exponential(1) roll lands in
    // each gap with a closed-form probability.
    fn accumulate<'r>(&self, rolls: impl Iterator<Item = &'r [f64]>, theta: &[f64], tau: f64) -> Vec<f64> {
        let k = self.types.len();
        let mut acc = vec![0.0; k];
        let mut scores = vec![0.0; k];
        let mut ahead: Vec<usize> = Vec::with_capacity(k);
        let mut p = vec![0.0; self.env.candidates()];
        for v in rolls {
            for i in 0..k {
                scores[i] = theta[i] * v[i] - tau;
            }
            for i in 0..k {
                let tail = |y: f64| (-(y + tau) / theta[i]).exp();
                ahead.clear();
                ahead.extend((0..k).filter(|&j| self.owner[j] != self.owner[i] && scores[j] > 0.0));
                ahead.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
                p.copy_from_slice(&self.inner);
                // Gap above the highest opposing score, then downwards.
                let mut upper = f64::INFINITY;
                let mut total = 0.0;
                for &j in &ahead {
                    let lower = scores[j];
                    let mass = if upper.is_infinite() { tail(lower) } else { tail(lower) - tail(upper) };
                    if mass > 0.0 {
                        total += mass * self.blocking.free(self.owner[i], &p);
                    }
                    p[self.owner[j]] += self.env.f(self.types[j]);
                    upper = lower;
                }
                let mass = if upper.is_infinite() { tail(0.0) } else { tail(0.0) - tail(upper) };
                if mass > 0.0 {
                    total += mass * self.blocking.free(self.owner[i], &p);
                }
                acc[i] += total;
            }
        }
        acc
    }

    /// Estimated winning probability of each layer type, in layer order.
    pub fn evaluate(&self, theta: &[f64], tau: f64, plan: &QmcPlan) -> Result<GEstimate> {
        let k = self.types.len();
        if theta.len() != k || plan.dims() < k {
            return Err(domain(format!(
                "expected {k} scale parameters and a plan of dimension ≥ {k}"
            )));
        }
        let per_shift: Vec<Vec<f64>> = (0..plan.shifts)
            .into_par_iter()
            .map(|s| {
                let sums = self.accumulate(plan.shift_rolls(s), theta, tau);
                sums.into_iter().map(|v| v / plan.points as f64).collect()
            })
            .collect();
        let r = plan.shifts as f64;
        let mut values = vec![0.0; k];
        let mut stderr = vec![0.0; k];
        for i in 0..k {
            let mean = per_shift.iter().map(|m| m[i]).sum::<f64>() / r;
            let var = per_shift.iter().map(|m| (m[i] - mean).powi(2)).sum::<f64>() / (r - 1.0);
            values[i] = mean;
            stderr[i] = (var / r).sqrt();
        }
        Ok(GEstimate { values, stderr })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GEstimate {
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Winning probabilities of the types in `set` (in increasing index order)
/// under `M|set` when type `t` rolls `θ_t v − τ`.
pub fn g_eval(
    env: &Environment<f64>,
    set: TypeSet,
    theta: &[f64],
    tau: f64,
    plan: &QmcPlan,
) -> Result<GEstimate> {
    let layer = Layer::new(env, set, vec![0.0; env.candidates()])?;
    layer.evaluate(theta, tau, plan)
}
