use thiserror::Error;

/// Errors raised by the solvers, analysis routines and sum-rule evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("eigen-iteration failed to converge: {0}")]
    ConvergenceFailure(String),

    #[error("state {index} has {found} interior sign changes, expected {expected}")]
    NodeCountMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("point {point} lies outside [{x0}, {x1}]")]
    OutOfDomain { point: f64, x0: f64, x1: f64 },

    #[error("non-finite integrand sample at {0}")]
    NonFinite(f64),

    #[error("integration path [{from}, {to}] contains a node at or below {node}")]
    NodeInPath { from: f64, to: f64, node: f64 },

    #[error("energies of states {j} and {k} coincide")]
    DegenerateEnergies { j: usize, k: usize },

    #[error("requested {requested} states but only {available} are available")]
    InsufficientStates { requested: usize, available: usize },

    #[error("{location} is not a node of state {n} (|psi| = {value:e})")]
    NotANode { n: usize, location: f64, value: f64 },

    #[error("{location} is not an extremum of state {n} (|dpsi| = {value:e})")]
    NotAnExtremum { n: usize, location: f64, value: f64 },

    #[error("evaluation points coincide at {0}")]
    CoincidentPoints(f64),

    #[error("partner potential is singular at the wall {0}")]
    SingularAtWall(f64),

    #[error("series diverges: {0}")]
    Divergent(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
