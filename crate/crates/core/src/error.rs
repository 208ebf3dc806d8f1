use alloc::string::String;
use alloc::vec::Vec;

use crate::optimize::LpError;

/// Errors raised by the synthesis core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("linear system is singular")]
    SingularSystem,
    #[error("observation has zero likelihood under the current belief")]
    ZeroLikelihood,
    #[error("unknown automaton state {0}")]
    UnknownState(usize),
    #[error("letter {0:#b} is not a subset of the declared propositions")]
    UnknownLetter(u32),
    #[error("unknown builtin automaton `{0}`")]
    UnknownName(String),
    #[error("atomic proposition sets differ between model and automaton")]
    AlphabetMismatch,
    #[error("selected Rabin pair has an empty Repeat set")]
    EmptyRepeat,
    #[error("controller has no steady I-states")]
    EmptySteadyPartition,
    #[error("steady I-state {from} moves to transient I-state {to} with positive probability")]
    StructureViolation { from: usize, to: usize },
    #[error("Poisson residual {0:e} exceeds tolerance")]
    ResidualTooLarge(f64),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid controller: {0}")]
    InvalidController(String),
    #[error("invalid grid-world specification: {0}")]
    InvalidSpec(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("LP failure: {0}")]
    Lp(#[from] LpError),
    #[error("bilinear variable `{0}` lacks finite bounds")]
    UnboundedBilinearVariable(String),
    #[error("no feasible controller found; attempted (transient, steady) sizes {0:?}")]
    Infeasible(Vec<(usize, usize)>),
    #[error("invariant breach: {0}")]
    InvariantBreach(String),
}
