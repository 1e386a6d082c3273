//! Interim winner-selection rules: Border-type feasibility checks, winner-selecting
//! dice constructions for single-winner, symmetric and matroid environments, and
//! exact or simulated evaluation of dice back to interim rules.

pub mod construct;
pub mod dice;
pub mod env;
pub mod error;
pub mod eval;
pub mod feasibility;
pub mod io;
pub mod matroid;
pub mod nonmatroid;
pub mod numeric;
pub mod reduce;
pub mod sets;
pub mod solver;
pub mod symmetric;

pub use env::{Environment, TypeId, TypeLayout};
pub use error::{Error, Result};
pub use matroid::{Constraint, Matroid, SetFamily};
pub use numeric::{Scalar, EPS};
pub use sets::{CandSet, TypeSet};
