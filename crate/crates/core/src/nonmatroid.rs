//! Four-candidate environment whose feasible winner sets are `{0, 1}`, `{2, 3}`
//! and their subsets (not a matroid), with the closed-form two-sided dice
//! proposed for it.

use crate::dice::{DiceSystem, Die};
use crate::env::Environment;
use crate::error::{domain, Result};
use crate::matroid::{Constraint, SetFamily};
use crate::numeric::Scalar;

/// Positive faces for the pair leaders (smaller interim value) and followers.
pub const PAIR_FACES: [[f64; 2]; 2] = [[100.0, 2.0], [10.0, 1.0]];

/// Single-type, always-present candidates under the `{0,1}`/`{2,3}` family.
pub fn nonmatroid_environment<S: Scalar>() -> Result<Environment<S>> {
    let family = SetFamily::new(4, &[vec![0, 1], vec![2, 3]])?;
    Environment::always_present(4, Constraint::Family(family))
}

/// Whether `x` is the interim rule of some distribution over feasible sets:
/// `max(x0, x1) + max(x2, x3) ≤ 1`.
pub fn nonmatroid_feasible<S: Scalar>(x: &[S; 4]) -> bool {
    let in_range = x.iter().all(|v| *v >= S::zero() && *v <= S::one());
    let first = S::max_of(x[0].clone(), x[1].clone());
    let second = S::max_of(x[2].clone(), x[3].clone());
    in_range && !(S::one() - first - second).is_violation()
}

// Quotient where 0/0 (up to tolerance) is read as 0.
fn ratio<S: Scalar>(num: S, den: S) -> S {
    if den.is_tight() {
        S::zero()
    } else {
        num / den
    }
}

/// Positive-face probabilities `(p1, p2, p3, p4)` of the closed form, for `x`
/// already ordered so that `x1 ≤ x2` and `x3 ≤ x4`.
pub fn nonmatroid_face_probabilities<S: Scalar>(x: &[S; 4]) -> [S; 4] {
    let [x1, x2, x3, x4] = x.clone();
    let one = S::one();
    let p1 = x1.clone();
    let p2 = ratio(x2.clone() - x1.clone(), one.clone() - x1.clone() - x3.clone());
    let p3 = ratio(x3.clone(), one.clone() - x1);
    let p4 = ratio(x4 - x3.clone(), one - x2 - x3);
    [p1, p2, p3, p4].map(|p| p.clamp_to(S::zero(), S::one()))
}

/// Two-sided dice for `x`. Within each pair the candidate with the smaller
/// interim value takes the leader face (100 or 10).
pub fn nonmatroid_example_dice<S: Scalar>(x: &[S; 4]) -> Result<DiceSystem<S>> {
    if !nonmatroid_feasible(x) {
        return Err(domain(
            "interim rule is infeasible for the {0,1}/{2,3} family",
        ));
    }
    let mut order = [0usize, 1, 2, 3];
    if x[0] > x[1] {
        order.swap(0, 1);
    }
    if x[2] > x[3] {
        order.swap(2, 3);
    }
    let sorted = order.map(|c| x[c].clone());
    let probs = nonmatroid_face_probabilities(&sorted);
    let faces = [
        PAIR_FACES[0][0],
        PAIR_FACES[0][1],
        PAIR_FACES[1][0],
        PAIR_FACES[1][1],
    ];
    let mut dice = vec![Die::point(crate::dice::LOSING_FACE); 4];
    for (slot, &c) in order.iter().enumerate() {
        dice[c] = Die::two_sided(faces[slot], probs[slot].clone());
    }
    Ok(DiceSystem::new(dice))
}
