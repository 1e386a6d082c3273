use num::{BigRational, One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wsd_persuasion::{
    check_persuasive, second_order_from_scheme, symmetric_second_order, Action, ActionType, Instance, Payoff, Scheme,
};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn random_prior(rng: &mut ChaCha8Rng, k: usize) -> Vec<BigRational> {
    let weights: Vec<i64> = (0..k).map(|_| rng.random_range(1..=5)).collect();
    let total: i64 = weights.iter().sum();
    weights.iter().map(|&w| q(w, total)).collect()
}

fn iid_instance(n: usize, prior: &[BigRational]) -> Instance {
    let action = |i: usize| Action {
        name: format!("a{i}"),
        types: prior
            .iter()
            .enumerate()
            .map(|(t, p)| ActionType {
                name: t.to_string(),
                prob: p.clone(),
                sender: BigRational::zero(),
                receiver: Payoff::Finite(BigRational::zero()),
            })
            .collect(),
    };
    Instance::new((0..n).map(action).collect()).unwrap()
}

/// A random scheme that always recommends some action.
fn random_full_scheme(rng: &mut ChaCha8Rng, inst: &Instance) -> Vec<Vec<BigRational>> {
    inst.profiles()
        .iter()
        .map(|_| {
            let w: Vec<i64> = (0..inst.len()).map(|_| rng.random_range(0..=4)).collect();
            let total: i64 = w.iter().sum();
            if total == 0 {
                let mut row = vec![BigRational::zero(); inst.len()];
                row[rng.random_range(0..inst.len())] = BigRational::one();
                row
            } else {
                w.iter().map(|&v| q(v, total)).collect()
            }
        })
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut next = p.clone();
            next.insert(pos, n - 1);
            out.push(next);
        }
    }
    out
}

/// Averages the scheme over all relabelings of the actions.
fn symmetrize(inst: &Instance, probs: &[Vec<BigRational>]) -> Scheme {
    let n = inst.len();
    let perms = permutations(n);
    let count = BigRational::from_integer((perms.len() as i64).into());
    Scheme::from_fn(inst, |types| {
        let mut row = vec![BigRational::zero(); n];
        for perm in &perms {
            // Action j's type moves to position perm[j].
            let mut moved = vec![0; n];
            for j in 0..n {
                moved[perm[j]] = types[j];
            }
            let k = inst.profile_index(&moved);
            for (i, v) in row.iter_mut().enumerate() {
                *v += &probs[k][perm[i]];
            }
        }
        row.into_iter().map(|v| v / &count).collect()
    })
    .unwrap()
}

#[test]
fn symmetric_identity_on_random_symmetrized_schemes() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let n = rng.random_range(2..=3);
        let k = rng.random_range(1..=3);
        let prior = random_prior(&mut rng, k);
        let inst = iid_instance(n, &prior);
        let raw = random_full_scheme(&mut rng, &inst);
        let scheme = symmetrize(&inst, &raw);
        let x = second_order_from_scheme(&inst, &scheme);
        let y = x.x[0][0].clone();
        let (_, z) = symmetric_second_order(n, &y).unwrap();
        let n_minus_1 = BigRational::from_integer((n as i64 - 1).into());
        for t in 0..k {
            assert!((&n_minus_1 * &z[t] + &y[t]).is_one());
            for i in 0..n {
                for j in 0..n {
                    let expected = if i == j { &y[t] } else { &z[t] };
                    assert_eq!(x.get(i, j, t), expected);
                }
            }
        }
    }
}

#[test]
fn diagonal_matches_first_order_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..30 {
        let n = rng.random_range(1..=3);
        let k = rng.random_range(1..=3);
        let prior = random_prior(&mut rng, k);
        let inst = iid_instance(n, &prior);
        let probs = random_full_scheme(&mut rng, &inst);
        let scheme = Scheme::new(&inst, probs.clone()).unwrap();
        let x = second_order_from_scheme(&inst, &scheme);
        // Independent first-order computation: condition on action i's type
        // and sum over the other actions' types.
        for (i, first_order) in x.first_order().iter().enumerate() {
            for (t, expected) in first_order.iter().enumerate() {
                let mut total = BigRational::zero();
                for (idx, profile) in inst.profiles().iter().enumerate() {
                    if profile.types[i] == t {
                        let others: BigRational = profile
                            .types
                            .iter()
                            .enumerate()
                            .filter(|&(j, _)| j != i)
                            .map(|(_, &u)| prior[u].clone())
                            .product();
                        total += others * &probs[idx][i];
                    }
                }
                assert_eq!(*expected, total);
            }
        }
    }
}

proptest! {
    #[test]
    fn uniform_schemes_are_persuasive_for_identical_payoffs(n in 1usize..4, k in 1usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prior = random_prior(&mut rng, k);
        let inst = iid_instance(n, &prior);
        let probs = random_full_scheme(&mut rng, &inst);
        let scheme = Scheme::new(&inst, probs).unwrap();
        prop_assert!(check_persuasive(&inst, &scheme).persuasive);
        let total: BigRational = scheme.recommendation_probabilities(&inst).into_iter().sum();
        prop_assert!(total.is_one());
    }
}
