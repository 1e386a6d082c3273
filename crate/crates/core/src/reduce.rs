//! Face reduction: replace a die by one supported on at most `m + 1` of its
//! faces (`m` = number of types) without changing any interim probability.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::dice::{DiceSystem, Die};
use crate::env::Environment;
use crate::error::{domain, Error, Result};
use crate::eval::interim_exact;

/// Largest tolerated change of an interim probability during elimination.
pub const REDUCE_TOLERANCE: f64 = 1e-8;

/// Interim rule of every type when the die of `target` always shows `value`.
fn column(env: &Environment<f64>, dice: &DiceSystem<f64>, target: usize, value: f64) -> Result<Vec<f64>> {
    let mut fixed = dice.clone();
    fixed.dice[target] = Die::point(value);
    interim_exact(env, &fixed)
}

/// Null vector of the `rows × (rows + 1)` matrix `a`, from the right singular
/// vector of the smallest singular value of `a` padded to a square matrix.
fn null_vector(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let (rows, cols) = a.shape();
    let mut square = DMatrix::zeros(cols, cols);
    square.view_mut((0, 0), (rows, cols)).copy_from(a);
    let svd = square.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numeric("singular value decomposition failed".into()))?;
    let (smallest, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty matrix");
    Ok(v_t.row(smallest).iter().copied().collect())
}

/// Reduces the die of `target` to at most `m + 1` faces, where `m` is the
/// number of types. Each face value `s` contributes the interim vector obtained
/// when the die always shows `s`; the interim rule is the convex combination of
/// these vectors, so any reweighting with the same combination preserves it.
/// Weights move along null directions until a face drops out.
pub fn reduce_faces(env: &Environment<f64>, dice: &DiceSystem<f64>, target: usize) -> Result<DiceSystem<f64>> {
    dice.check_against(env)?;
    if target >= env.types() {
        return Err(domain(format!("type index {target} is out of range")));
    }
    let m = env.types();
    let faces = dice.dice[target].faces().to_vec();
    if faces.len() <= m + 1 {
        return Ok(dice.clone());
    }
    let columns: Vec<Vec<f64>> = faces
        .par_iter()
        .map(|(v, _)| column(env, dice, target, *v))
        .collect::<Result<_>>()?;
    let entry = |row: usize, col: usize| if row < m { columns[col][row] } else { 1.0 };
    let rows = m + 1;
    let mut weight: Vec<f64> = faces.iter().map(|f| f.1).collect();
    let mut support: Vec<usize> = (0..faces.len()).collect();
    while support.len() > rows {
        let block = &support[..=rows];
        let a = DMatrix::from_fn(rows, rows + 1, |r, c| entry(r, block[c]));
        let mut d = null_vector(&a)?;
        // Orient so the largest-magnitude coordinate is positive.
        let pivot = d
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .expect("non-empty direction");
        if pivot == 0.0 {
            return Err(Error::Numeric("face reduction found a zero null direction".into()));
        }
        for v in d.iter_mut() {
            *v /= pivot;
        }
        let (drop, step) = block
            .iter()
            .zip(&d)
            .enumerate()
            .filter(|(_, (_, &dv))| dv > 0.0)
            .map(|(i, (&col, &dv))| (i, weight[col] / dv))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("pivot coordinate is positive");
        for (&col, &dv) in block.iter().zip(&d) {
            weight[col] = (weight[col] - step * dv).max(0.0);
        }
        weight[block[drop]] = 0.0;
        support.retain(|&c| weight[c] > 0.0);
    }
    let original: Vec<f64> = faces.iter().map(|f| f.1).collect();
    let residual = (0..rows)
        .map(|r| {
            let before: f64 = (0..faces.len()).map(|c| entry(r, c) * original[c]).sum();
            let after: f64 = support.iter().map(|&c| entry(r, c) * weight[c]).sum();
            (before - after).abs()
        })
        .fold(0.0, f64::max);
    if residual > REDUCE_TOLERANCE {
        return Err(Error::Numeric(format!(
            "face reduction changed the interim rule by {residual:e}"
        )));
    }
    let total: f64 = support.iter().map(|&c| weight[c]).sum();
    let mut out = dice.clone();
    out.dice[target] = Die::new(support.iter().map(|&c| (faces[c].0, weight[c] / total)).collect())?;
    Ok(out)
}

/// Applies [`reduce_faces`] to every type in turn.
pub fn reduce_all_faces(env: &Environment<f64>, dice: &DiceSystem<f64>) -> Result<DiceSystem<f64>> {
    (0..env.types()).try_fold(dice.clone(), |acc, t| reduce_faces(env, &acc, t))
}
