//! Numerical construction of dice for matroid environments.

pub mod assemble;
pub mod geval;
pub mod layer;

pub use assemble::{assemble_matroid_dice, LayerKind, LayerReport, MatroidDice};
pub use geval::{g_eval, GEstimate, Layer, QmcPlan};
pub use layer::{solve_barrier_dice, solve_layer, LayerSolution, SolverOptions, SolverReport};
