//! Solvers for the max-min (fair) allocation problem.
//!
//! Two pipelines are provided. The general pipeline transforms an instance
//! into a canonical form, routes flow through a layered graph via an LP,
//! rounds the fractional solution in phases and iteratively shrinks the set
//! of unsatisfied terminal agents. The 2-restricted pipeline casts the
//! instance as a non-uniformly weighted multigraph and orients its edges.
//!
//! Exact brute-force oracles and adversarial instance generators live next
//! to the solvers so every guarantee can be checked with exact arithmetic.

pub mod balance;
pub mod bs;
pub mod canonical;
pub mod exec;
pub mod flownet;
pub mod generators;
pub mod instance;
pub mod io;
pub mod layered;
pub mod lp;
pub mod matching;
pub mod maxflow;
pub mod rational;
pub mod rounding;
pub mod smalllp;
pub mod spider;
pub mod vector_enum;

use thiserror::Error;

/// Errors shared across the solver pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("id out of range: {0}")]
    IdOutOfRange(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("enumeration guard exceeded: {0}")]
    GuardExceeded(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invariant breach: {0}")]
    Invariant(String),
    #[error("statistical retry cap exhausted: {0}")]
    RetryExhausted(String),
    #[error("numerical failure in LP solve: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
