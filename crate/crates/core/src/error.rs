use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} exceeds the supported size ({actual} > {limit}){hint}")]
    Capacity {
        what: &'static str,
        limit: usize,
        actual: usize,
        hint: &'static str,
    },

    #[error("interim rule is infeasible: constraint for {set} has slack {slack:.12e}")]
    Infeasible { set: String, slack: f64 },

    #[error("enumeration needs {terms} terms, above the limit of {limit}")]
    EnumerationTooLarge { terms: u128, limit: u128 },

    #[error("tied group of {size} candidates exceeds the exact tie-averaging limit of {limit}")]
    TieGroupTooLarge { size: usize, limit: usize },

    #[error("construction made no progress at step {step}: {detail}")]
    NoProgress { step: usize, detail: String },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("solver did not converge: {0}")]
    NotConverged(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
