use serde::{Deserialize, Serialize};

use super::MechanismError;

/// Approximate-DP target: (eps, delta).
///
/// `new` enforces eps > 0 and delta in (0, 1), which is what configs
/// must satisfy. Fields stay public because composition results may be
/// degenerate (eps = 0 when every step had eps = 0) and are built
/// directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    pub eps: f64,
    pub delta: f64,
}

impl PrivacyBudget {
    pub fn new(eps: f64, delta: f64) -> Result<Self, MechanismError> {
        if !eps.is_finite() || eps <= 0.0 {
            return Err(MechanismError::InvalidEpsilon(eps));
        }
        if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
            return Err(MechanismError::InvalidDelta(delta));
        }
        Ok(Self { eps, delta })
    }
}

/// One point on a Renyi privacy curve: order alpha > 1, divergence
/// bound rho.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RdpPoint {
    pub alpha: f64,
    pub rho: f64,
}

/// Renyi divergence bound for a generalized Gaussian whose centers
/// differ by `sensitivity` in the dual norm:
/// rho(alpha) = kappa * alpha^2 * s^2 / (2 sigma2 * (alpha - 1)),
/// where kappa is the smoothness constant of the squared noise norm.
pub fn gg_rdp(
    alpha: f64,
    sensitivity: f64,
    sigma2: f64,
    kappa: f64,
) -> Result<RdpPoint, MechanismError> {
    if !alpha.is_finite() || alpha <= 1.0 {
        return Err(MechanismError::InvalidOrder(alpha));
    }
    if !sensitivity.is_finite() || sensitivity < 0.0 {
        return Err(MechanismError::InvalidSensitivity(sensitivity));
    }
    if !sigma2.is_finite() || sigma2 <= 0.0 {
        return Err(MechanismError::NonPositive { what: "sigma2", got: sigma2 });
    }
    if !kappa.is_finite() || kappa < 1.0 {
        return Err(MechanismError::InvalidRegularity(kappa));
    }
    let rho = kappa * alpha * alpha * sensitivity * sensitivity / (2.0 * sigma2 * (alpha - 1.0));
    Ok(RdpPoint { alpha, rho })
}

/// Variance that meets `budget` for one release with the given dual
/// sensitivity: sigma2 = 2 * kappa * ln(1/delta) * s^2 / eps^2.
///
/// Preconditions (asserted): s >= 0 finite, kappa >= 1 finite. A zero
/// sensitivity yields zero variance; callers skip noising in that case.
pub fn gg_calibrate(sensitivity: f64, kappa: f64, budget: &PrivacyBudget) -> f64 {
    assert!(
        sensitivity.is_finite() && sensitivity >= 0.0,
        "sensitivity must be nonnegative, got {sensitivity}"
    );
    assert!(kappa.is_finite() && kappa >= 1.0, "kappa must be >= 1, got {kappa}");
    2.0 * kappa * (1.0 / budget.delta).ln() * sensitivity * sensitivity / (budget.eps * budget.eps)
}

/// Standard RDP-to-DP conversion at a fixed order:
/// eps = rho + ln(1/delta) / (alpha - 1).
pub fn rdp_to_dp(point: &RdpPoint, delta: f64) -> Result<f64, MechanismError> {
    if !point.alpha.is_finite() || point.alpha <= 1.0 {
        return Err(MechanismError::InvalidOrder(point.alpha));
    }
    if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
        return Err(MechanismError::InvalidDelta(delta));
    }
    Ok(point.rho + (1.0 / delta).ln() / (point.alpha - 1.0))
}

/// Number of orders scanned when optimizing the conversion.
pub const ALPHA_GRID_LEN: usize = 200;
/// Smallest grid value of alpha - 1.
pub const ALPHA_GRID_MIN: f64 = 1e-3;
/// Largest grid value of alpha - 1.
pub const ALPHA_GRID_MAX: f64 = 999.0;

/// Minimize rho(alpha) + ln(1/delta)/(alpha - 1) over a fixed log grid
/// of orders (alpha - 1 log-spaced over [1e-3, 999], 200 points).
/// Returns (eps, alpha at the minimum).
pub fn rdp_to_dp_min_over_grid(
    rho_at: impl Fn(f64) -> f64,
    delta: f64,
) -> Result<(f64, f64), MechanismError> {
    if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
        return Err(MechanismError::InvalidDelta(delta));
    }
    let log_min = ALPHA_GRID_MIN.ln();
    let log_max = ALPHA_GRID_MAX.ln();
    let step = (log_max - log_min) / (ALPHA_GRID_LEN - 1) as f64;
    let tail = (1.0 / delta).ln();
    let mut best = (f64::INFINITY, f64::NAN);
    for i in 0..ALPHA_GRID_LEN {
        let alpha = 1.0 + (log_min + step * i as f64).exp();
        let eps = rho_at(alpha) + tail / (alpha - 1.0);
        if eps < best.0 {
            best = (eps, alpha);
        }
    }
    Ok(best)
}

/// Grid-optimized DP guarantee of one generalized Gaussian release.
pub fn gg_dp_over_grid(
    sensitivity: f64,
    sigma2: f64,
    kappa: f64,
    delta: f64,
) -> Result<(f64, f64), MechanismError> {
    // Validate once through the constructor, then reuse the raw formula.
    gg_rdp(2.0, sensitivity, sigma2, kappa)?;
    rdp_to_dp_min_over_grid(
        |alpha| kappa * alpha * alpha * sensitivity * sensitivity / (2.0 * sigma2 * (alpha - 1.0)),
        delta,
    )
}

/// Advanced composition of k adaptive (eps, delta)-DP mechanisms:
/// eps' = eps * sqrt(2 k ln(1/slack)) + k * eps * (e^eps - 1),
/// delta' = k * delta + slack.
///
/// The result may be degenerate (eps' = 0 when eps = 0, or delta' >= 1
/// for absurd k); it is returned as computed and validated only where a
/// budget enters a config.
pub fn advanced_composition(
    eps: f64,
    delta: f64,
    k: usize,
    slack: f64,
) -> Result<PrivacyBudget, MechanismError> {
    if !eps.is_finite() || eps < 0.0 {
        return Err(MechanismError::InvalidEpsilon(eps));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(MechanismError::InvalidDelta(delta));
    }
    if !slack.is_finite() || slack <= 0.0 || slack >= 1.0 {
        return Err(MechanismError::InvalidDelta(slack));
    }
    let k = k as f64;
    let eps_total =
        eps * (2.0 * k * (1.0 / slack).ln()).sqrt() + k * eps * (eps.exp_m1());
    Ok(PrivacyBudget { eps: eps_total, delta: k * delta + slack })
}
