use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] wsd_core::Error),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("instance has {actual} type profiles, above the limit of {limit}")]
    TooManyProfiles { actual: u128, limit: u128 },

    #[error("linear program is {0}")]
    Lp(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
