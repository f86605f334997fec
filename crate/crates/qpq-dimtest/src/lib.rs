//! Simulation and verification of a qubit-qutrit dimensionality attack on a
//! quantum private query (QPQ) raw-key phase, together with the CHSH-like
//! game Bob can play locally to certify the dimension of Alice's subsystem.
//!
//! The crate has two independent computation paths for every probability:
//! closed-form trigonometric expressions on one side and Born-rule evaluation
//! (inner products in [`quantum`], materialized projectors in [`oracle`]) on
//! the other. The [`oracle`] module cross-checks both paths and flags printed
//! table entries that disagree with the Born rule.

pub mod certifier;
pub mod circuit;
pub mod cli;
pub mod families;
pub mod game;
pub mod oracle;
pub mod qpq;
pub mod quantum;

/// Tolerance for exact double-precision arithmetic checks.
pub const TOL: f64 = 1e-12;

/// Looser threshold separating genuine transcription errors from roundoff.
pub const DISCREPANCY_TOL: f64 = 1e-9;

pub use quantum::{tensor, BipartiteState, JointDistribution, Ket, MeasurementBasis, StateEnsemble};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("state not normalized: |norm^2 - 1| = {0:e}")]
    NotNormalized(f64),
    #[error("basis not orthonormal: max deviation {0:e}")]
    NotOrthonormal(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
