//! Differentially private stochastic convex optimization beyond Euclidean
//! geometry: Generalized Gaussian noise calibrated by Renyi accounting, a
//! tree-structured noisy Frank-Wolfe solver for lp balls (1 < p <= 2), and a
//! report-noisy-min Frank-Wolfe solver for polytopes, plus a verification
//! harness that checks the quantitative claims behind both.

// Validation code writes `!(x > 0.0)` instead of `x <= 0.0` on purpose: the
// negated form is true for NaN, so NaN inputs fail validation instead of
// slipping through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod estimators;
pub mod geometry;
pub mod harness;
pub mod mechanisms;
pub mod problems;
pub mod solvers;
pub(crate) mod util;

pub use estimators::{BiasTrace, EstimatorState};
pub use harness::{ExperimentConfig, HarnessError, RunOptions, VerificationReport};
pub use geometry::{FeasibleSet, PolyRegularity, Polytope, SpaceSpec};
pub use mechanisms::{GGParams, GGSampler, PrivacyBudget, RdpPoint};
pub use problems::{Dataset, LossKind, Problem, SampleEncoding};
pub use solvers::{
    noisy_tree_sfw, poly_sfw, PolySfwConfig, RunReport, SolverError, TreeSfwConfig,
};
