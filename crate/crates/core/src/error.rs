use thiserror::Error;

use crate::lp::{LpError, LpStatus};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed input: {message}")]
    Malformed { line: usize, message: String },

    #[error("line {line}: unsupported feature: {what}")]
    Unsupported { line: usize, what: String },

    #[error("value {value} out of range for variable {var} (domain size {domain_size})")]
    OutOfRange {
        var: usize,
        value: usize,
        domain_size: usize,
    },

    #[error("invalid task: {0}")]
    InvalidTask(String),

    #[error("operator {0} is not applicable")]
    NotApplicable(String),

    #[error("state space too large: {states} states exceed the cap of {cap}")]
    StateSpaceTooLarge { states: u128, cap: u128 },

    #[error("task is not in transition normal form")]
    NotTnf,

    #[error("feature set has dimension {0}, at most 2 is supported by this construction")]
    DimensionTooHigh(usize),

    #[error("invalid feature: {0}")]
    InvalidFeature(String),

    #[error("feature {0} is not context-independent for the operator")]
    NotContextIndependent(String),

    #[error("elimination ordering does not cover variable {0}")]
    OrderingIncomplete(usize),

    #[error("abstraction with empty pattern has no feature representation")]
    EmptyPattern,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("no solvable task found in {0} attempts")]
    NoSolvableTask(usize),

    #[error("no plan: goal unreachable from the initial state")]
    NoPlan,

    #[error("LP is {0:?}")]
    LpNotOptimal(LpStatus),

    #[error(transparent)]
    Lp(#[from] LpError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
