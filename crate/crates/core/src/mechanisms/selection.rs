use rand::Rng;

use super::MechanismError;

/// Centered Laplace draw with the given scale, via inverse CDF.
///
/// A zero scale returns 0.0 without touching the stream, so noiseless
/// replays of a selection consume no randomness. Preconditions
/// (asserted): scale finite and nonnegative.
pub fn laplace_sample<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    assert!(scale.is_finite() && scale >= 0.0, "scale must be nonnegative, got {scale}");
    if scale == 0.0 {
        return 0.0;
    }
    loop {
        let u = rng.random::<f64>() - 0.5;
        let m = 1.0 - 2.0 * u.abs();
        // m = 0 (u drawn exactly at -0.5) would map to infinity; it has
        // probability 2^-53, resample instead.
        if m > 0.0 {
            return -scale * u.signum() * m.ln();
        }
    }
}

/// Report-noisy-min: perturb every score with iid Laplace(scale) and
/// return the index of the smallest perturbed score (lowest index on
/// ties) together with the selection gap nu = chosen true score minus
/// the true minimum.
///
/// Exactly `scores.len()` Laplace draws are consumed when scale > 0, in
/// index order; none when scale = 0.
pub fn report_noisy_min<R: Rng + ?Sized>(
    scores: &[f64],
    scale: f64,
    rng: &mut R,
) -> Result<(usize, f64), MechanismError> {
    if scores.is_empty() {
        return Err(MechanismError::EmptyScores);
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(MechanismError::NonFinite { what: "scores" });
    }
    let mut chosen = 0usize;
    let mut best = f64::INFINITY;
    let mut true_min = f64::INFINITY;
    for (i, &s) in scores.iter().enumerate() {
        let noisy = s + laplace_sample(scale, rng);
        if noisy < best {
            best = noisy;
            chosen = i;
        }
        true_min = true_min.min(s);
    }
    Ok((chosen, scores[chosen] - true_min))
}
