//! Outlier rejection through minimally trimmed squares (MTS).
//!
//! Given measurements with a global least-squares solver, MTS asks for the
//! smallest set of rejected measurements such that the rest fit within an
//! outlier-free budget. This crate provides:
//!
//! - [`problem`]: the [`MtsProblem`] abstraction every algorithm is generic over,
//! - [`adapt`]: adaptive trimming, which rejects measurements under a
//!   self-discounting residual threshold,
//! - [`bounds`]: the a-posteriori certificate `chi_O` and exact comparison
//!   quantities for small instances,
//! - [`solvers`]: linear least squares and closed-form 3D registration,
//! - [`baselines`]: RANSAC, greedy trimming and an exhaustive MTS oracle,
//! - [`datagen`], [`metrics`], [`harness`]: experiment plumbing.

pub mod adapt;
pub mod baselines;
pub mod bounds;
pub mod datagen;
mod error;
pub mod harness;
pub mod metrics;
pub mod problem;
pub mod solvers;

pub use adapt::{adapt_run, largest_indices, AdaptConfig, AdaptResult, Termination};
pub use bounds::{bound_report, chi_bound, BoundOptions, BoundReport, ChiBound};
pub use error::{Error, Result, SolverError};
pub use problem::{
    evaluate, residual_vector, total_residual, Evaluation, Evaluator, MeasurementIndex, MtsProblem, OutlierFreeBound,
    OutlierSet,
};
pub use solvers::{LinearProblem, RegistrationProblem, RigidTransform};
