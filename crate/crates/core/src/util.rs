//! Shared numeric helpers: deterministic summation, seed derivation, float
//! formatting for the results schema, and scalar quadrature.

/// Element count above which batch means switch from sequential to pairwise
/// accumulation. Pairwise keeps rounding error O(log n) on large batches
/// while the order stays independent of threading and chunk sizes.
const PAIRWISE_THRESHOLD: usize = 1_000_000;

/// Mean of `count` vectors of dimension `d`, where `eval(i, out)` writes the
/// i-th vector into `out`. Accumulation is sequential in index order below
/// [`PAIRWISE_THRESHOLD`] total elements and pairwise (by index blocks)
/// above it, so the result is a pure function of the inputs.
pub fn mean_vectors<F>(count: usize, d: usize, mut eval: F) -> Vec<f64>
where
    F: FnMut(usize, &mut [f64]),
{
    assert!(count > 0, "mean over an empty batch");
    let mut sum = vec![0.0; d];
    let mut scratch = vec![0.0; d];
    if count.saturating_mul(d) <= PAIRWISE_THRESHOLD {
        for i in 0..count {
            eval(i, &mut scratch);
            for (s, v) in sum.iter_mut().zip(&scratch) {
                *s += v;
            }
        }
    } else {
        pairwise_sum_into(0, count, d, &mut eval, &mut sum, &mut scratch);
    }
    let inv = 1.0 / count as f64;
    for s in &mut sum {
        *s *= inv;
    }
    sum
}

fn pairwise_sum_into<F>(lo: usize, hi: usize, d: usize, eval: &mut F, out: &mut [f64], scratch: &mut [f64])
where
    F: FnMut(usize, &mut [f64]),
{
    const BLOCK: usize = 128;
    if hi - lo <= BLOCK {
        for i in lo..hi {
            eval(i, scratch);
            for (s, v) in out.iter_mut().zip(scratch.iter()) {
                *s += v;
            }
        }
        return;
    }
    let mid = lo + (hi - lo) / 2;
    let mut right = vec![0.0; d];
    pairwise_sum_into(lo, mid, d, eval, out, scratch);
    pairwise_sum_into(mid, hi, d, eval, &mut right, scratch);
    for (s, v) in out.iter_mut().zip(&right) {
        *s += v;
    }
}

/// SplitMix64 step; the standard finalizer-style mixer.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable seed derivation: folds the coordinate parts into the root seed
/// with SplitMix64 rounds. Stable across platforms and releases, unlike the
/// std hasher, so run seeds written in one build replay in another.
pub fn derive_seed(root: u64, parts: &[u64]) -> u64 {
    let mut acc = splitmix64(root);
    for &p in parts {
        acc = splitmix64(acc ^ splitmix64(p.wrapping_add(0xA076_1D64_78BD_642F)));
    }
    acc
}

/// Formats with 17 significant digits so that parsing the string recovers
/// the exact f64; the results schema requires bit-exact round trips.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.16e}")
    }
}

/// Composite Simpson weights for an odd number of nodes (>= 3).
pub fn simpson_weights(nodes: usize, h: f64) -> Vec<f64> {
    assert!(nodes >= 3 && nodes % 2 == 1, "composite Simpson needs an odd node count");
    let mut w = vec![0.0; nodes];
    w[0] = h / 3.0;
    w[nodes - 1] = h / 3.0;
    for (i, wi) in w.iter_mut().enumerate().take(nodes - 1).skip(1) {
        *wi = if i % 2 == 1 { 4.0 * h / 3.0 } else { 2.0 * h / 3.0 };
    }
    w
}
