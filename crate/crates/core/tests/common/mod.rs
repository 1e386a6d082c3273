#![allow(dead_code)]

use rand::Rng;
use wsd_core::{Constraint, Environment, Matroid};

/// Random probability vector of length `k` with every entry positive.
pub fn random_simplex<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Random single-winner environment with `n` candidates and at most
/// `max_types` types in total (at least one per candidate).
pub fn random_single_winner<R: Rng>(rng: &mut R, n: usize, max_types: usize) -> Environment<f64> {
    let mut counts = vec![1usize; n];
    let extra = rng.random_range(0..=max_types.saturating_sub(n));
    for _ in 0..extra {
        counts[rng.random_range(0..n)] += 1;
    }
    let priors = counts.iter().map(|&k| random_simplex(rng, k)).collect();
    Environment::from_priors(priors, Constraint::Matroid(Matroid::single_winner(n).unwrap()))
        .unwrap()
}

/// Interim rule of a random ex-post rule: every type profile picks a winner
/// among the present candidates (or nobody) with random weights.
pub fn random_expost_interim<R: Rng>(rng: &mut R, env: &Environment<f64>) -> Vec<f64> {
    let n = env.candidates();
    let ranges: Vec<Vec<usize>> = (0..n)
        .map(|i| env.layout().range(i).unwrap().collect())
        .collect();
    let mut won = vec![0.0; env.types()];
    let mut index = vec![0usize; n];
    loop {
        let profile: Vec<usize> = (0..n).map(|i| ranges[i][index[i]]).collect();
        let prob: f64 = profile.iter().map(|&t| env.f(t)).product();
        // Sparse random weights so some rules sit on the boundary.
        let weights: Vec<f64> = (0..=n)
            .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random::<f64>() })
            .collect();
        let total: f64 = weights.iter().sum();
        if total > 0.0 {
            for (i, &t) in profile.iter().enumerate() {
                won[t] += prob * weights[i] / total;
            }
        }
        let mut pos = 0;
        loop {
            if pos == n {
                return won
                    .iter()
                    .enumerate()
                    .map(|(t, w)| (w / env.f(t)).clamp(0.0, 1.0))
                    .collect();
            }
            index[pos] += 1;
            if index[pos] < ranges[pos].len() {
                break;
            }
            index[pos] = 0;
            pos += 1;
        }
    }
}

/// Random feasible symmetric rule for `n` i.i.d. candidates: a random direction
/// scaled towards the boundary of the symmetric Border polytope, landing exactly
/// on it about a third of the time.
pub fn random_symmetric_rule<R: Rng>(rng: &mut R, n: usize, f: &[f64]) -> Vec<f64> {
    let raw: Vec<f64> = f
        .iter()
        .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() })
        .collect();
    let mut order: Vec<usize> = (0..f.len()).collect();
    order.sort_by(|&a, &b| raw[b].total_cmp(&raw[a]));
    let mut scale = f64::INFINITY;
    let (mut mass, mut weighted) = (0.0, 0.0);
    for &t in &order {
        mass += f[t];
        weighted += f[t] * raw[t];
        if weighted > 0.0 {
            scale = scale.min((1.0 - (1.0 - mass).powi(n as i32)) / (n as f64 * weighted));
        }
    }
    let top = raw.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return raw;
    }
    let shrink = if rng.random_bool(0.35) { 1.0 } else { rng.random_range(0.3..1.0) };
    let scale = (scale * shrink).min(1.0 / top);
    raw.iter().map(|v| (v * scale).min(1.0)).collect()
}

/// Random die with up to `max_faces` faces drawn from a small value grid, so
/// ties across dice are common.
pub fn random_die<R: Rng>(rng: &mut R, max_faces: usize) -> wsd_core::dice::Die<f64> {
    let k = rng.random_range(1..=max_faces);
    let probs = random_simplex(rng, k);
    let faces = probs
        .into_iter()
        .map(|p| (rng.random_range(-1..=6) as f64, p))
        .collect();
    wsd_core::dice::Die::new(faces).unwrap()
}

/// Random dice system for `env`.
pub fn random_dice<R: Rng>(rng: &mut R, env: &Environment<f64>, max_faces: usize) -> wsd_core::dice::DiceSystem<f64> {
    wsd_core::dice::DiceSystem::new((0..env.types()).map(|_| random_die(rng, max_faces)).collect())
}
