use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Shapes, keys or dimensions do not line up.
    #[error("structural error: {0}")]
    Structural(String),
    /// A value lies outside its admissible domain (negative probability, λ > 1, ...).
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
    /// Desk-scale guard: enumeration would exceed the configured LP budget.
    #[error("budget exceeded: {what} needs {count} entries, limit is {limit}")]
    Budget {
        what: String,
        count: u128,
        limit: usize,
    },
    #[error("invalid submodular oracle: {0}")]
    InvalidOracle(String),
    #[error("linear program is unbounded")]
    Unbounded,
    /// The prefix commitments Q^i cannot be met, so the stage LP has no feasible point.
    #[error("interim prefix is not implementable up to stage {stage}")]
    PrefixInfeasible { stage: usize },
    #[error("interim allocation is not implementable")]
    NotImplementable,
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
