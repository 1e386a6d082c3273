//! Second-order interim rules of direct persuasion schemes, exact
//! persuasiveness checks, the symmetric i.i.d. reduction, and a verifier for
//! a three-action instance that has no dice-based optimal scheme.

pub mod error;
pub mod instance;
pub mod io;
pub mod lp;
pub mod scheme;
pub mod table1;

pub use error::{Error, Result};
pub use instance::{Action, ActionType, Instance, Payoff, Profile};
pub use scheme::{
    check_persuasive, second_order_from_scheme, symmetric_rule, symmetric_second_order, PersuasionCheck, Scheme,
    SecondOrderRule,
};
pub use table1::{table1_instance, table1_scheme, verify_table1_no_dice, Table1Trace, TraceStatus};
