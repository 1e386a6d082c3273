//! Finite dice for a feasible matroid interim rule: split into components,
//! peel a chain of tight sets into value bands, solve every band numerically,
//! then discretize and reduce.

use log::{debug, warn};

use crate::dice::{DiceSystem, Die, LOSING_FACE};
use crate::env::Environment;
use crate::error::{domain, Error, Result};
use crate::eval::interim_exact;
use crate::feasibility::check_feasibility_matroid;
use crate::numeric::{Scalar, EPS};
use crate::reduce::reduce_faces;
use crate::sets::TypeSet;

use super::geval::Layer;
use super::layer::{solve_layer, LayerSolution, SolverOptions};

/// Largest environment the assembly accepts.
pub const MAX_SOLVER_TYPES: usize = 8;

/// Interim values this close to 1 are served by a point die.
const SURE_WIN: f64 = 1.0 - 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum LayerKind {
    /// Types with `x = 1`, given a point die above every band.
    SureWinners,
    /// One candidate filling a tight difference, given a point die in its band.
    SingleCandidate,
    /// Parameterized dice solved numerically.
    Solved(LayerSolution),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerReport {
    pub component: usize,
    pub types: TypeSet,
    /// Positive faces of this layer lie in `(band, band + 1)`.
    pub band: f64,
    pub kind: LayerKind,
}

#[derive(Clone, Debug)]
pub struct MatroidDice {
    pub dice: DiceSystem<f64>,
    pub layers: Vec<LayerReport>,
    /// Exact interim rule of `dice`.
    pub interim: Vec<f64>,
    pub max_error: f64,
    pub converged: bool,
}

/// Maps a positive face into `(band, band + 1)`, preserving order.
pub fn band_face(band: f64, s: f64) -> f64 {
    band + 1.0 - 1.0 / (1.0 + s)
}

/// Chain of tight sets `C_0 ⊂ C_1 ⊂ … ⊂ active`, each a minimal tight proper
/// superset of the previous one (or `active` itself when none exists).
/// Returns the successive differences.
pub fn tight_chain(env: &Environment<f64>, x: &[f64], base: TypeSet, active: TypeSet) -> Result<Vec<TypeSet>> {
    let mut tight = Vec::new();
    for set in active.subsets() {
        if set.is_empty() || !base.is_subset(set) || set == base {
            continue;
        }
        let mass: f64 = set.iter().map(|t| env.f(t) * x[t]).sum();
        if env.expected_rank(set)? - mass <= EPS {
            tight.push(set);
        }
    }
    let mut layers = Vec::new();
    let mut current = base;
    while current != active {
        let next = tight
            .iter()
            .filter(|s| current.is_subset(**s) && **s != current)
            .min_by_key(|s| (s.len(), s.0))
            .copied()
            .unwrap_or(active);
        layers.push(next.difference(current));
        current = next;
    }
    Ok(layers)
}

/// Discretizes the die `θ v − τ` (v ~ Exponential(1)) into the losing face and
/// `quantiles` equally likely positive faces mapped into the band. The
/// positive part is `θ` times an Exponential(1) variable.
pub fn discretize(theta: f64, tau: f64, band: f64, quantiles: usize) -> Die<f64> {
    let positive = (-tau / theta).exp();
    let mut faces = vec![(LOSING_FACE, 1.0 - positive)];
    let each = positive / quantiles as f64;
    for k in 0..quantiles {
        let u = (k as f64 + 0.5) / quantiles as f64;
        let s = -theta * (1.0 - u).ln();
        faces.push((band_face(band, s), each));
    }
    Die::canonical(faces)
}

/// Builds finite dice for a feasible interim rule `x` in a matroid
/// environment. The result reports its exact interim rule and whether every
/// layer met `options.tol`.
pub fn assemble_matroid_dice(env: &Environment<f64>, x: &[f64], options: &SolverOptions) -> Result<MatroidDice> {
    let matroid = env
        .matroid()
        .ok_or_else(|| domain("the matroid solver needs a matroid constraint"))?;
    if env.types() > MAX_SOLVER_TYPES {
        return Err(Error::Capacity {
            what: "type count for the matroid solver",
            limit: MAX_SOLVER_TYPES,
            actual: env.types(),
            hint: "",
        });
    }
    check_feasibility_matroid(env, x)?.into_result(|set| env.layout().describe(set))?;
    let mut dice = vec![Die::point(LOSING_FACE); env.types()];
    let mut positive = vec![0.0; env.types()];
    let mut reports = Vec::new();
    let mut converged = true;
    for (index, component) in matroid.components()?.into_iter().enumerate() {
        let types = component
            .iter()
            .fold(TypeSet::EMPTY, |acc, c| acc.union(env.layout().types_of(c)));
        let active = TypeSet::from_indices(types.iter().filter(|&t| (env.f(t) * x[t]).has_mass()));
        let sure = TypeSet::from_indices(active.iter().filter(|&t| x[t] >= SURE_WIN));
        let layers = tight_chain(env, x, sure, active)?;
        let top = layers.len() as f64 + 1.0;
        if !sure.is_empty() {
            for t in sure.iter() {
                dice[t] = Die::point(top + 0.5);
                positive[t] = 1.0;
            }
            reports.push(LayerReport {
                component: index,
                types: sure,
                band: top,
                kind: LayerKind::SureWinners,
            });
        }
        let mut inner_types = sure;
        for (depth, &layer_types) in layers.iter().enumerate() {
            let band = layers.len() as f64 - depth as f64;
            let mut inner = vec![0.0; env.candidates()];
            for u in inner_types.iter() {
                inner[env.owner(u)] += env.f(u) * positive[u];
            }
            let owners = env.layout().candidates_of(layer_types);
            let whole = inner_types.union(layer_types);
            let mass: f64 = whole.iter().map(|t| env.f(t) * x[t]).sum();
            let is_tight = env.expected_rank(whole)? - mass <= EPS;
            let kind = if owners.len() == 1 && is_tight {
                for t in layer_types.iter() {
                    dice[t] = Die::point(band + 0.5);
                    positive[t] = 1.0;
                }
                LayerKind::SingleCandidate
            } else {
                let layer = Layer::new(env, layer_types, inner)?;
                let x_layer: Vec<f64> = layer_types.iter().map(|t| x[t]).collect();
                let solution = solve_layer(&layer, env, &x_layer, options)?;
                if !solution.report.converged {
                    warn!(
                        "layer {} did not converge: residual {:e}",
                        env.layout().describe(layer_types),
                        solution.report.max_residual()
                    );
                    converged = false;
                }
                for (i, &t) in solution.types.iter().enumerate() {
                    dice[t] = discretize(solution.theta[i], solution.tau, band, options.quantiles);
                    positive[t] = solution.positive_mass(i);
                }
                LayerKind::Solved(solution)
            };
            debug!("band {band}: {}", env.layout().describe(layer_types));
            reports.push(LayerReport {
                component: index,
                types: layer_types,
                band,
                kind,
            });
            inner_types = whole;
        }
    }
    let mut system = DiceSystem::new(dice);
    if options.reduce {
        for t in 0..env.types() {
            system = reduce_faces(env, &system, t)?;
        }
    }
    let interim = interim_exact(env, &system)?;
    let max_error = interim
        .iter()
        .zip(x)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(MatroidDice {
        dice: system,
        layers: reports,
        interim,
        max_error,
        converged: converged && max_error <= options.tol,
    })
}
