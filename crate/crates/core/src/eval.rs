//! Dice to interim rule: exact evaluators and Monte-Carlo simulation.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dice::{select_with_priority, DiceSystem, Die};
use crate::env::Environment;
use crate::error::{domain, Error, Result};
use crate::matroid::{Constraint, Matroid};
use crate::numeric::{poisson_binomial, Scalar};

/// Upper bound on outcome profiles for brute-force enumeration.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;
/// Largest tied group whose orderings are averaged exactly.
pub const TIE_GROUP_LIMIT: usize = 6;
/// Largest candidate count for the order-statistics matroid evaluator.
pub const ORDER_EVAL_LIMIT: usize = 12;

/// Distribution of candidate `i`'s score: `Pr[v_i = u] = Σ_t f(t) Pr[D_t = u]`,
/// sorted by value.
pub fn score_pmf<S: Scalar>(env: &Environment<S>, dice: &DiceSystem<S>, i: usize) -> Vec<(f64, S)> {
    let range = env.layout().range(i).expect("candidate in range");
    let mut faces = Vec::new();
    for t in range {
        for (v, p) in dice.dice[t].faces() {
            faces.push((*v, env.f(t).clone() * p.clone()));
        }
    }
    Die::canonical(faces).faces().to_vec()
}

/// Cumulative view of a score distribution.
struct ScoreCdf<S> {
    values: Vec<f64>,
    pmf: Vec<S>,
    cdf: Vec<S>,
}

impl<S: Scalar> ScoreCdf<S> {
    fn new(pmf: Vec<(f64, S)>) -> Self {
        let mut acc = S::zero();
        let mut cdf = Vec::with_capacity(pmf.len());
        for (_, p) in &pmf {
            acc = acc + p.clone();
            cdf.push(acc.clone());
        }
        let (values, pmf) = pmf.into_iter().unzip();
        ScoreCdf { values, pmf, cdf }
    }

    /// `(Pr[v = u], Pr[v ≤ u])`.
    fn at(&self, u: f64) -> (S, S) {
        match self.values.binary_search_by(|v| v.total_cmp(&u)) {
            Ok(k) => (self.pmf[k].clone(), self.cdf[k].clone()),
            Err(0) => (S::zero(), S::zero()),
            Err(k) => (S::zero(), self.cdf[k - 1].clone()),
        }
    }
}

/// Exact single-winner interim rule via per-candidate score CDFs and a
/// Poisson-binomial count of tied opponents.
pub fn interim_single_winner<S: Scalar>(env: &Environment<S>, dice: &DiceSystem<S>) -> Result<Vec<S>> {
    if !env.is_single_winner() {
        return Err(domain("the closed-form evaluator needs a single-winner environment"));
    }
    dice.check_against(env)?;
    let n = env.candidates();
    let cdfs: Vec<ScoreCdf<S>> = (0..n).map(|i| ScoreCdf::new(score_pmf(env, dice, i))).collect();
    let mut x = vec![S::zero(); env.types()];
    for i in 0..n {
        let mut cache: Vec<(f64, S)> = Vec::new();
        for t in env.layout().range(i).expect("candidate in range") {
            let mut total = S::zero();
            for (u, p) in dice.dice[t].faces() {
                if *u <= 0.0 {
                    continue;
                }
                let w = match cache.iter().find(|c| c.0 == *u) {
                    Some(c) => c.1.clone(),
                    None => {
                        let w = single_winner_weight(&cdfs, i, *u)?;
                        cache.push((*u, w.clone()));
                        w
                    }
                };
                total = total + p.clone() * w;
            }
            x[t] = total;
        }
    }
    Ok(x)
}

// Probability that candidate `i` wins with score `u`: every opponent at most `u`,
// ties split uniformly.
fn single_winner_weight<S: Scalar>(cdfs: &[ScoreCdf<S>], i: usize, u: f64) -> Result<S> {
    let mut below = S::one();
    let mut params = Vec::with_capacity(cdfs.len());
    for (j, cdf) in cdfs.iter().enumerate() {
        if j == i {
            continue;
        }
        let (eq, le) = cdf.at(u);
        if le.is_zero() {
            if !eq.is_zero() {
                return Err(Error::Numeric(format!(
                    "candidate {j} has Pr[v = {u}] > 0 but Pr[v ≤ {u}] = 0"
                )));
            }
            return Ok(S::zero());
        }
        params.push(eq / le.clone());
        below = below * le;
    }
    let share = poisson_binomial(&params)
        .into_iter()
        .enumerate()
        .fold(S::zero(), |acc, (k, b)| acc + b / S::from_count(k + 1));
    Ok(below * share)
}

/// Exact winning probabilities of each candidate for fixed scores, averaging
/// over uniformly random orderings of tied candidates.
pub fn win_probabilities<S: Scalar>(constraint: &Constraint, scores: &[f64]) -> Result<Vec<S>> {
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).filter(|&c| scores[c] > 0.0).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut groups: Vec<&[usize]> = Vec::new();
    let mut start = 0;
    for k in 1..=order.len() {
        if k == order.len() || scores[order[k]] != scores[order[start]] {
            groups.push(&order[start..k]);
            start = k;
        }
    }
    let mut probs = vec![S::zero(); n];
    if let Constraint::Matroid(Matroid::Uniform { k, .. }) = constraint {
        let mut slots = *k;
        for group in groups {
            if slots == 0 {
                break;
            }
            let share = if group.len() <= slots {
                S::one()
            } else {
                S::from_count(slots) / S::from_count(group.len())
            };
            for &c in group {
                probs[c] = share.clone();
            }
            slots = slots.saturating_sub(group.len());
        }
        return Ok(probs);
    }
    if let Some(big) = groups.iter().find(|g| g.len() > TIE_GROUP_LIMIT) {
        return Err(Error::TieGroupTooLarge {
            size: big.len(),
            limit: TIE_GROUP_LIMIT,
        });
    }
    let tied: Vec<&[usize]> = groups.into_iter().filter(|g| g.len() > 1).collect();
    let mut perms: Vec<Vec<usize>> = tied.iter().map(|g| g.to_vec()).collect();
    let mut priority: Vec<usize> = (0..n).collect();
    let mut counts = vec![0usize; n];
    let mut total = 0usize;
    loop {
        for perm in &perms {
            let mut slots = perm.clone();
            slots.sort_unstable();
            for (slot, &c) in slots.iter().zip(perm) {
                priority[c] = *slot;
            }
        }
        let outcome = select_with_priority(constraint, scores, &priority);
        for c in outcome.winners.iter() {
            counts[c] += 1;
        }
        total += 1;
        // Advance the odometer of per-group permutations.
        let mut g = 0;
        loop {
            if g == perms.len() {
                let denom = S::from_count(total);
                for (c, count) in counts.iter().enumerate() {
                    probs[c] = S::from_count(*count) / denom.clone();
                }
                return Ok(probs);
            }
            if next_permutation(&mut perms[g]) {
                break;
            }
            perms[g].sort_unstable();
            g += 1;
        }
    }
}

fn next_permutation(items: &mut [usize]) -> bool {
    if items.len() < 2 {
        return false;
    }
    let mut i = items.len() - 1;
    while i > 0 && items[i - 1] >= items[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = items.len() - 1;
    while items[j] <= items[i - 1] {
        j -= 1;
    }
    items.swap(i - 1, j);
    items[i..].reverse();
    true
}

/// Brute-force interim rule: enumerates every type profile and face profile,
/// conditioning on each type being realized. Works for any constraint.
pub fn interim_exact_enumeration<S: Scalar>(env: &Environment<S>, dice: &DiceSystem<S>) -> Result<Vec<S>> {
    dice.check_against(env)?;
    let n = env.candidates();
    // Per candidate: (type, face value, Pr[face | type], Pr[type and face]).
    let outcomes: Vec<Vec<(usize, f64, S, S)>> = (0..n)
        .map(|i| {
            env.layout()
                .range(i)
                .expect("candidate in range")
                .flat_map(|t| {
                    dice.dice[t]
                        .faces()
                        .iter()
                        .map(move |(v, p)| (t, *v, p.clone(), env.f(t).clone() * p.clone()))
                })
                .collect()
        })
        .collect();
    let terms = outcomes
        .iter()
        .try_fold(1u128, |acc, o| acc.checked_mul(o.len() as u128))
        .unwrap_or(u128::MAX);
    if terms > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            terms,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut x = vec![S::zero(); env.types()];
    let mut index = vec![0usize; n];
    let mut scores = vec![0.0; n];
    loop {
        for i in 0..n {
            scores[i] = outcomes[i][index[i]].1;
        }
        let wins: Vec<S> = win_probabilities(env.constraint(), &scores)?;
        for i in 0..n {
            if wins[i].is_zero() {
                continue;
            }
            let (t, _, cond, _) = &outcomes[i][index[i]];
            let mut weight = cond.clone() * wins[i].clone();
            for j in 0..n {
                if j != i {
                    weight = weight * outcomes[j][index[j]].3.clone();
                }
            }
            x[*t] = x[*t].clone() + weight;
        }
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(x);
            }
            index[pos] += 1;
            if index[pos] < outcomes[pos].len() {
                break;
            }
            index[pos] = 0;
            pos += 1;
        }
    }
}

/// Exact interim rule for matroid constraints, polynomial in the number of
/// faces. A candidate with score `u > 0` wins iff it is outside the span of the
/// candidates processed before it: those with higher scores and a uniformly
/// placed subset of those tied at `u`.
pub fn interim_matroid_exact<S: Scalar>(env: &Environment<S>, dice: &DiceSystem<S>) -> Result<Vec<S>> {
    let matroid = env
        .matroid()
        .ok_or_else(|| domain("the order-statistics evaluator needs a matroid"))?;
    dice.check_against(env)?;
    let n = env.candidates();
    if n > ORDER_EVAL_LIMIT {
        return Err(Error::Capacity {
            what: "candidate count for the matroid evaluator",
            limit: ORDER_EVAL_LIMIT,
            actual: n,
            hint: "",
        });
    }
    let rank = matroid.rank_table()?;
    let cdfs: Vec<ScoreCdf<S>> = (0..n).map(|i| ScoreCdf::new(score_pmf(env, dice, i))).collect();
    let mut x = vec![S::zero(); env.types()];
    for c in 0..n {
        let mut cache: Vec<(f64, S)> = Vec::new();
        for t in env.layout().range(c).expect("candidate in range") {
            let mut total = S::zero();
            for (u, p) in dice.dice[t].faces() {
                if *u <= 0.0 {
                    continue;
                }
                let w = match cache.iter().find(|e| e.0 == *u) {
                    Some(e) => e.1.clone(),
                    None => {
                        let w = matroid_weight(&rank, &cdfs, c, *u);
                        cache.push((*u, w.clone()));
                        w
                    }
                };
                total = total + p.clone() * w;
            }
            x[t] = total;
        }
    }
    Ok(x)
}

fn matroid_weight<S: Scalar>(rank: &[u8], cdfs: &[ScoreCdf<S>], c: usize, u: f64) -> S {
    // (Pr[v > u], Pr[v = u], Pr[v < u]) for each opponent.
    let split: Vec<(usize, [S; 3])> = cdfs
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != c)
        .map(|(j, cdf)| {
            let (eq, le) = cdf.at(u);
            let above = S::one() - le.clone();
            let below = le - eq.clone();
            (j, [above, eq, below])
        })
        .collect();
    let mut total = S::zero();
    let mut stack = vec![(0usize, 0u32, 0u32, S::one())];
    while let Some((k, higher, tied, prob)) = stack.pop() {
        if prob.is_zero() {
            continue;
        }
        if k == split.len() {
            total = total + prob * tie_average::<S>(rank, c, higher, tied);
            continue;
        }
        let (j, probs) = &split[k];
        stack.push((k + 1, higher | 1 << j, tied, prob.clone() * probs[0].clone()));
        stack.push((k + 1, higher, tied | 1 << j, prob.clone() * probs[1].clone()));
        stack.push((k + 1, higher, tied, prob * probs[2].clone()));
    }
    total
}

// Probability that `c` is outside span(higher ∪ F) for F the tied candidates
// placed before `c` in a uniformly random order.
fn tie_average<S: Scalar>(rank: &[u8], c: usize, higher: u32, tied: u32) -> S {
    let spans = |set: u32| rank[(set | 1 << c) as usize] == rank[set as usize];
    if tied == 0 {
        return if spans(higher) { S::zero() } else { S::one() };
    }
    let m = tied.count_ones() as usize;
    let mut free_by_size = vec![0usize; m + 1];
    let mut sub = 0u32;
    loop {
        if !spans(higher | sub) {
            free_by_size[sub.count_ones() as usize] += 1;
        }
        if sub == tied {
            break;
        }
        sub = sub.wrapping_sub(tied) & tied;
    }
    let mut acc = S::zero();
    let mut binom = 1usize;
    for (k, free) in free_by_size.iter().enumerate() {
        acc = acc + S::from_count(*free) / S::from_count(binom);
        binom = binom * m.saturating_sub(k) / (k + 1);
    }
    acc / S::from_count(m + 1)
}

/// Exact interim rule using the fastest applicable evaluator.
pub fn interim_exact<S: Scalar>(env: &Environment<S>, dice: &DiceSystem<S>) -> Result<Vec<S>> {
    match env.constraint() {
        _ if env.is_single_winner() => interim_single_winner(env, dice),
        Constraint::Matroid(_) if env.candidates() <= ORDER_EVAL_LIMIT => interim_matroid_exact(env, dice),
        _ => interim_exact_enumeration(env, dice),
    }
}

/// Monte-Carlo estimate of an interim rule with standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub samples: usize,
}

struct Sampler {
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Sampler {
    fn new(faces: &[(f64, f64)]) -> Self {
        let mut acc = 0.0;
        let mut values = Vec::with_capacity(faces.len());
        let mut cumulative = Vec::with_capacity(faces.len());
        for (v, p) in faces {
            acc += p;
            values.push(*v);
            cumulative.push(acc);
        }
        Sampler { values, cumulative }
    }

    fn index<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty sampler");
        let u = rng.random::<f64>() * total;
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.values.len() - 1)
    }
}

/// Simulates the dice. Each type `t` gets its own run of `samples` draws in
/// which its candidate's type is forced to `t`; the run uses a random stream
/// derived from `(seed, t)`, so results do not depend on scheduling.
pub fn interim_monte_carlo(
    env: &Environment<f64>,
    dice: &DiceSystem<f64>,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if samples == 0 {
        return Err(domain("Monte-Carlo simulation needs at least one sample"));
    }
    dice.check_against(env)?;
    let n = env.candidates();
    let type_samplers: Vec<(Vec<usize>, Sampler)> = (0..n)
        .map(|i| {
            let range = env.layout().range(i).expect("candidate in range");
            let types: Vec<usize> = range.collect();
            let probs: Vec<(f64, f64)> = types.iter().map(|&t| (t as f64, *env.f(t))).collect();
            (types, Sampler::new(&probs))
        })
        .collect();
    let face_samplers: Vec<Sampler> = dice.dice.iter().map(|d| Sampler::new(d.faces())).collect();
    let results: Vec<(f64, f64)> = (0..env.types())
        .into_par_iter()
        .map(|t| {
            let own = env.owner(t);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let mut scores = vec![0.0; n];
            let mut priority: Vec<usize> = (0..n).collect();
            let mut wins = 0usize;
            for _ in 0..samples {
                for i in 0..n {
                    let ty = if i == own {
                        t
                    } else {
                        let (types, sampler) = &type_samplers[i];
                        types[sampler.index(&mut rng)]
                    };
                    let s = &face_samplers[ty];
                    scores[i] = s.values[s.index(&mut rng)];
                }
                for i in (1..n).rev() {
                    let j = rng.random_range(0..=i);
                    priority.swap(i, j);
                }
                if select_with_priority(env.constraint(), &scores, &priority)
                    .winners
                    .contains(own)
                {
                    wins += 1;
                }
            }
            let p = wins as f64 / samples as f64;
            (p, (p * (1.0 - p) / samples as f64).sqrt())
        })
        .collect();
    let (mean, stderr) = results.into_iter().unzip();
    Ok(MonteCarloEstimate {
        mean,
        stderr,
        samples,
    })
}

/// Largest componentwise absolute difference.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, |m, d| match d.partial_cmp(&m) {
            Some(Ordering::Greater) => d,
            _ => m,
        })
}
