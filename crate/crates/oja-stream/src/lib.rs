//! Single-pass, O(d)-memory streaming PCA.
//!
//! The crate estimates the top eigenvector of Sigma = E[A_i] from one pass
//! over independently sampled matrices, using the classic per-sample
//! update w <- normalize(w + eta_i A_i w) with step-size schedules whose
//! finite-sample behavior is governed by the stream's concentration
//! parameters (M, V) and the spectral gap. Alongside the estimator it
//! ships:
//!
//! - baseline estimators (batch eigensolve of the empirical mean, block
//!   power method) for head-to-head comparisons,
//! - closed-form evaluators for the relevant error bounds,
//! - Monte Carlo verifiers that check the analysis' moment inequalities
//!   numerically at desk scale,
//! - geometric-median boosting of the success probability, and
//! - a seeded, bit-reproducible experiment harness with CSV output
//!   (see the `oja-stream` binary).

pub mod baselines;
pub mod boost;
pub mod config;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oja;
pub mod replay;
pub mod rng;
pub mod runner;
pub mod theory;

pub use error::{OjaError, Result};
pub use linalg::{
    normalize, rayleigh, sin_sq, sym_eig, sym_eig_top2, DenseMatrix, SymMatrix, UnitVector, Vector,
};
pub use model::{GroundTruth, ModelBounds, Sample, StreamDistribution};
pub use oja::{oja_run, oja_step, RunResult, StepSchedule};
