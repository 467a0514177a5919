use std::io;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("root bracketing failed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    Bracketing { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("non-finite fitness in generation {generation} (offspring {offspring})")]
    NonFiniteFitness { generation: u64, offspring: usize },

    #[error("sigma collapse in generation {generation}: sigma = {sigma:e}")]
    SigmaCollapse { generation: u64, sigma: f64 },

    #[error("iteration did not converge after {iterations} steps: {reason}; last states: {excerpt}")]
    NonConvergent { iterations: usize, reason: String, excerpt: String },

    #[error("no stable steady state in model: {0}")]
    NoSteadyState(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}
