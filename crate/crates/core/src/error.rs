use thiserror::Error;

use crate::poly::Polynomial;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition of an operation was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Polynomial division left a nonzero remainder.
    #[error("not divisible; remainder {remainder}")]
    NotDivisible { remainder: Polynomial },

    /// An internal consistency check failed (e.g. a formula that must be
    /// integral produced a fractional coefficient).
    #[error("integrity failure: {0}")]
    Integrity(String),

    #[error("unknown claim id `{0}`")]
    UnknownClaim(String),

    /// An exhaustive check could not cover its domain within the budget.
    #[error("incomplete: {0}")]
    Incomplete(String),

    /// A search window was refused because it exceeds the candidate budget.
    #[error("window has {count} candidate triples, budget is {budget}")]
    BudgetExceeded { count: u128, budget: u128 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
