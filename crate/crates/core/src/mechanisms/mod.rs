//! Noise mechanisms and privacy accounting.
//!
//! The central primitive is the generalized Gaussian distribution with
//! density proportional to `exp(-||z - mu||_r^2 / (2 sigma^2))`, where
//! `||.||_r` is an lr norm. Its key property is that the Renyi divergence
//! between two centers depends on the dual-norm distance between them
//! through the smoothness constant of `||.||_r^2`, which makes it the
//! natural noise for gradients whose sensitivity is measured in a
//! non-Euclidean norm. This module provides exact sampling, moment
//! formulas, Renyi accounting with conversion to approximate DP, and the
//! scalar Laplace / noisy-min primitives used by the polyhedral solver.

mod accounting;
mod gg;
mod selection;

pub use accounting::{
    advanced_composition, gg_calibrate, gg_dp_over_grid, gg_rdp, rdp_to_dp, rdp_to_dp_min_over_grid,
    PrivacyBudget, RdpPoint, ALPHA_GRID_LEN, ALPHA_GRID_MAX, ALPHA_GRID_MIN,
};
pub use gg::{gg_exp_moment_bound, gg_light_tail_nu, gg_moment_exact, gg_sample, GGParams, GGSampler};
pub use selection::{laplace_sample, report_noisy_min};

use thiserror::Error;

/// Errors from mechanism construction, sampling, and accounting.
#[derive(Debug, Error)]
pub enum MechanismError {
    #[error("dimension must be at least 1")]
    BadDimension,
    #[error("norm exponent r must be finite and >= 2, got {0}")]
    InvalidExponent(f64),
    #[error("{what} must be positive and finite, got {got}")]
    NonPositive { what: &'static str, got: f64 },
    #[error("{what} must be finite")]
    NonFinite { what: &'static str },
    #[error("center length {got} does not match dimension {expected}")]
    CenterMismatch { expected: usize, got: usize },
    #[error("Renyi order must be > 1, got {0}")]
    InvalidOrder(f64),
    #[error("sensitivity must be nonnegative and finite, got {0}")]
    InvalidSensitivity(f64),
    #[error("regularity constant must be >= 1, got {0}")]
    InvalidRegularity(f64),
    #[error("delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("moment order must be at least 1")]
    InvalidMomentOrder,
    #[error("light-tail scale requires nu^2 > 2 sigma^2, got nu^2 = {nu2} vs sigma^2 = {sigma2}")]
    LightTailScale { nu2: f64, sigma2: f64 },
    #[error("score vector is empty")]
    EmptyScores,
}
