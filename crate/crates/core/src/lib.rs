//! Numerical laboratory for monogamy-of-entanglement (MoE) games.
//!
//! Three parties play: a referee Alice measures a state prepared by two
//! cooperating players, Bob and Charlie, who must both guess her outcome
//! without communicating. This crate implements the prototypical game in
//! which Alice measures a qubit in the computational or Hadamard basis
//! (the TFKW game), together with:
//!
//! - dense complex linear algebra sized for desk-scale simulation ([`matrix`]);
//! - the named qubit operators and states of the theory, POVM/PVM types,
//!   state purification, and Naimark dilation ([`quantum`]);
//! - games, strategies, winning probabilities, bias, the game polynomial,
//!   and its sum-of-squares certificate ([`games`]);
//! - approximate representations of binary groups and the constructive
//!   Gowers-Hatami dilation ([`reps`]);
//! - rigidity extraction: recovery of the Wiesner-Breidbart decomposition
//!   from (near-)optimal strategies, single-round and parallel-repeated
//!   ([`rigidity`]);
//! - tail bounds, observed-statistics machinery, and min-entropy for
//!   classical joints ([`stats`]);
//! - executable simulations of the three-party weak string erasure and
//!   randomness-expansion protocols with an enforced isolation contract
//!   ([`protocols`]).

pub mod bits;
pub mod games;
pub mod matrix;
pub mod protocols;
pub mod quantum;
pub mod reps;
pub mod rigidity;
pub mod stats;

use thiserror::Error;

/// Global numerical tolerance for identity-style checks (Hermiticity,
/// unitarity, completeness, projectivity).
pub const TOL: f64 = 1e-9;

/// Looser tolerance for quantities that pass through an eigensolver.
pub const EIG_TOL: f64 = 1e-6;

/// Largest dimension a dilated tensor factor may take; operations refuse
/// to build anything bigger.
pub const DIM_CAP: usize = 1 << 12;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("not a valid POVM: {0}")]
    NotPovm(String),

    #[error("measurement is not projective (max defect {0:.3e})")]
    NotProjective(f64),

    #[error("operator is not a self-inverse unitary (defect {0:.3e})")]
    NotSelfInverse(f64),

    #[error("bitstring length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("dimension {0} exceeds the configured cap {1}")]
    DimensionCap(usize, usize),

    #[error("operation requires a two-answer game, got {0} answers")]
    TwoAnswersRequired(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("good-set size violation in round {round}: |G| = {size}, need > {needed}")]
    GoodSetViolation {
        round: usize,
        size: usize,
        needed: f64,
    },

    #[error("isolation contract violated: {0}")]
    IsolationViolation(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
