//! Approximation algorithms for capacitated multi-item lot-sizing with
//! non-uniform capacities.
//!
//! The pipeline solves a strengthened LP relaxation by cut generation, rounds
//! the order variables through interval and laminar knapsack-cover
//! subproblems, and assigns demand to the chosen orders by max-flow.

/// Returns `Err(InvariantViolation)` with a formatted message unless `cond`.
macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::InvariantViolation(format!($($arg)+)).into());
        }
    };
}

pub mod assignment;
pub mod flow;
pub mod instance;
pub mod interval;
pub mod interval_kc;
pub mod laminar_kc;
pub mod lp;
pub mod master;
pub mod num;
pub mod oracles;
pub mod separation;

/// An internal guarantee of the algorithm failed to hold. Seeing one means a
/// bug (or a caller breaking a documented precondition), not bad input.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invariant violated: {0}")]
pub struct InvariantViolation(pub String);

impl From<lp::LpError> for InvariantViolation {
    fn from(e: lp::LpError) -> Self {
        InvariantViolation(format!("malformed internal LP: {e}"))
    }
}

