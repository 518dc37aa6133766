//! Recursive variance-reduced gradient estimators and the concentration
//! bounds used to certify them.
//!
//! The update maintained here is
//! `new = (1 - alpha) * (old + mean(grad_new - grad_old)) + alpha * mean(grad_new) + noise`,
//! which covers three regimes: alpha = 1 is a plain mini-batch restart,
//! alpha = 0 is a pure recursive correction (the tree solver), and
//! 0 < alpha < 1 is the damped form used by the polyhedral solver. The
//! bound evaluators are deliberately standalone so the same oracle
//! serves both solver instantiations and the verification harness.

use serde::Serialize;
use thiserror::Error;

use crate::util::mean_vectors;

/// Errors from estimator updates.
#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("gradient batches differ in length: new {new}, old {old}")]
    BatchMismatch { new: usize, old: usize },
    #[error("gradient batch is empty")]
    EmptyBatch,
    #[error("batch length {got} is not a multiple of dimension {d}")]
    RaggedBatch { d: usize, got: usize },
    #[error("noise length {got} does not match dimension {expected}")]
    NoiseMismatch { expected: usize, got: usize },
    #[error("averaging factor must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("estimator state has non-finite entries")]
    NonFinite,
}

/// A recursive gradient estimate together with its bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorState {
    /// Current estimate of the population gradient.
    pub current: Vec<f64>,
    /// Number of updates applied since initialization.
    pub step: usize,
    /// Averaging factor used by the most recent update.
    pub alpha: f64,
    /// Total per-sample gradient evaluations charged so far; each batch
    /// is charged once even though the update evaluates it at two
    /// points.
    pub consumed: usize,
}

impl EstimatorState {
    pub fn new(current: Vec<f64>, alpha: f64, consumed: usize) -> Result<Self, EstimatorError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(EstimatorError::InvalidAlpha(alpha));
        }
        if current.iter().any(|v| !v.is_finite()) {
            return Err(EstimatorError::NonFinite);
        }
        Ok(Self { current, step: 0, alpha, consumed })
    }
}

/// One variance-reduced update.
///
/// `grad_new` and `grad_old` are per-sample gradients at the current and
/// previous iterate, stored row-major (`batch * d` entries each) and
/// computed on the SAME mini-batch. Means use a fixed summation order
/// (index order, pairwise above a size threshold) so identical seeds
/// reproduce results bit for bit. With alpha = 1 the correction term is
/// skipped entirely and the result is exactly the mini-batch mean plus
/// noise.
pub fn spider_update(
    state: &EstimatorState,
    grad_new: &[f64],
    grad_old: &[f64],
    alpha: f64,
    noise: Option<&[f64]>,
) -> Result<EstimatorState, EstimatorError> {
    let d = state.current.len();
    if !(0.0..=1.0).contains(&alpha) {
        return Err(EstimatorError::InvalidAlpha(alpha));
    }
    if grad_new.len() != grad_old.len() {
        return Err(EstimatorError::BatchMismatch { new: grad_new.len(), old: grad_old.len() });
    }
    if grad_new.is_empty() {
        return Err(EstimatorError::EmptyBatch);
    }
    if !grad_new.len().is_multiple_of(d) {
        return Err(EstimatorError::RaggedBatch { d, got: grad_new.len() });
    }
    if let Some(g) = noise {
        if g.len() != d {
            return Err(EstimatorError::NoiseMismatch { expected: d, got: g.len() });
        }
    }
    let batch = grad_new.len() / d;

    let mut current = if alpha == 1.0 {
        mean_vectors(batch, d, |i, out| out.copy_from_slice(&grad_new[i * d..(i + 1) * d]))
    } else {
        let mean_new = mean_vectors(batch, d, |i, out| {
            out.copy_from_slice(&grad_new[i * d..(i + 1) * d]);
        });
        let mean_diff = mean_vectors(batch, d, |i, out| {
            for j in 0..d {
                out[j] = grad_new[i * d + j] - grad_old[i * d + j];
            }
        });
        (0..d)
            .map(|j| (1.0 - alpha) * (state.current[j] + mean_diff[j]) + alpha * mean_new[j])
            .collect()
    };
    if let Some(g) = noise {
        for (c, n) in current.iter_mut().zip(g) {
            *c += n;
        }
    }
    Ok(EstimatorState {
        current,
        step: state.step + 1,
        alpha,
        consumed: state.consumed + batch,
    })
}

/// Evaluate the high-probability bias bound of the recursive estimator
/// after `t` updates out of a horizon of `t_horizon`:
///
/// `C_beta * [ (1-alpha)^t L0 / sqrt(B[0])
///           + (L1 M eta[t] + alpha L0) * sum_{s<t} (1-alpha)^{t-(s+1)} / sqrt(B[s])
///           + sum_{s<t} (1-alpha)^{t-(s+1)} nu[s] ]`
///
/// with `C_beta = sqrt(e kappa) + sqrt(3 ln(2 t_horizon / beta))`. The
/// schedules are per-step arrays indexed as in the formula; `eta[t]` is
/// only read when t >= 1. Preconditions are asserted: this is a test
/// oracle, and a malformed schedule is a bug in the caller.
#[allow(clippy::too_many_arguments)]
pub fn estimator_bias_bound(
    t: usize,
    t_horizon: usize,
    alpha: f64,
    eta_schedule: &[f64],
    batch_sizes: &[usize],
    nu_schedule: &[f64],
    l0: f64,
    l1: f64,
    m_diam: f64,
    kappa: f64,
    beta: f64,
) -> f64 {
    assert!(t_horizon >= 1 && t <= t_horizon, "step {t} outside horizon {t_horizon}");
    assert!((0.0..=1.0).contains(&alpha), "alpha out of range: {alpha}");
    assert!(beta > 0.0 && beta < 1.0, "beta out of range: {beta}");
    assert!(kappa >= 1.0, "kappa must be >= 1, got {kappa}");
    assert!(l0 >= 0.0 && l1 >= 0.0 && m_diam >= 0.0, "scales must be nonnegative");
    assert!(!batch_sizes.is_empty() && batch_sizes.len() >= t, "batch schedule too short");
    assert!(nu_schedule.len() >= t, "noise schedule too short");
    assert!(batch_sizes.iter().all(|&b| b >= 1), "batch sizes must be >= 1");

    let c_beta = (std::f64::consts::E * kappa).sqrt()
        + (3.0 * (2.0 * t_horizon as f64 / beta).ln()).sqrt();

    let one_minus = 1.0 - alpha;
    let init = one_minus.powi(t as i32) * l0 / (batch_sizes[0] as f64).sqrt();

    let mut sum_batch = 0.0;
    let mut sum_nu = 0.0;
    // Weight (1-alpha)^{t-(s+1)} built by descending from s = t-1, so
    // alpha = 1 keeps exactly the s = t-1 summand (0^0 = 1).
    let mut weight = 1.0;
    for s in (0..t).rev() {
        sum_batch += weight / (batch_sizes[s] as f64).sqrt();
        sum_nu += weight * nu_schedule[s];
        weight *= one_minus;
    }
    let drift = if t >= 1 {
        assert!(eta_schedule.len() > t, "step-size schedule too short");
        (l1 * m_diam * eta_schedule[t] + alpha * l0) * sum_batch
    } else {
        0.0
    };
    c_beta * (init + drift + sum_nu)
}

/// Dimension-free martingale tail in a kappa-regular space: the norm of
/// a martingale sum with per-step light-tail scales `psi` exceeds
/// `(sqrt(2 e kappa) + sqrt(2) tau) * ||psi||_2` with probability at
/// most `2 exp(-tau^2 / 3)`. Returns (threshold, probability bound).
pub fn martingale_tail_bound(kappa: f64, psi: &[f64], tau: f64) -> (f64, f64) {
    assert!(kappa >= 1.0, "kappa must be >= 1, got {kappa}");
    assert!(tau >= 0.0 && tau.is_finite(), "tau must be nonnegative, got {tau}");
    assert!(
        psi.iter().all(|&p| p.is_finite() && p >= 0.0),
        "light-tail scales must be nonnegative"
    );
    let psi_l2 = psi.iter().map(|p| p * p).sum::<f64>().sqrt();
    let threshold = ((2.0 * std::f64::consts::E * kappa).sqrt() + std::f64::consts::SQRT_2 * tau)
        * psi_l2;
    (threshold, 2.0 * (-tau * tau / 3.0).exp())
}

/// Observed estimator error against its theoretical bound, step by step.
#[derive(Debug, Clone, Default, Serialize)]
pub struct BiasTrace {
    /// Confidence parameter the bounds were evaluated at.
    pub beta: f64,
    pub entries: Vec<BiasEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BiasEntry {
    pub step: usize,
    /// Measured dual-norm error of the estimate.
    pub observed: f64,
    /// Value of the bias bound at this step.
    pub bound: f64,
}

impl BiasTrace {
    pub fn new(beta: f64) -> Self {
        assert!(beta > 0.0 && beta < 1.0, "beta out of range: {beta}");
        Self { beta, entries: Vec::new() }
    }

    pub fn push(&mut self, step: usize, observed: f64, bound: f64) {
        assert!(observed >= 0.0 && bound >= 0.0, "trace values must be nonnegative");
        self.entries.push(BiasEntry { step, observed, bound });
    }

    /// Worst observed-minus-bound slack; None when nothing was traced.
    /// Nonpositive means every step stayed inside its bound.
    pub fn max_gap(&self) -> Option<f64> {
        self.entries
            .iter()
            .map(|e| e.observed - e.bound)
            .max_by(|a, b| a.partial_cmp(b).expect("trace values are finite"))
    }
}
