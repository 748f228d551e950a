//! Shifted exponential sums shared by the equilibrium, multiplier and order code.
//!
//! All sums over `exp(t * a_i)` are evaluated relative to the dominant term,
//! which for an increasing observable is `a_n` when `t >= 0` and `a_1`
//! otherwise. The exponents are formed as `t * (a_i - a_k)` rather than
//! `t * a_i - t * a_k`, so ratios between neighbouring weights keep full
//! relative precision even for large `|t|`.

/// Index of the dominant term of `exp(t * a_i)` for increasing `values`.
#[inline]
pub(crate) fn pivot(values: &[f64], t: f64) -> usize {
    if t >= 0.0 {
        values.len() - 1
    } else {
        0
    }
}

/// Weights `exp(t * (a_i - a_k))`; the dominant weight is exactly one.
pub(crate) fn tilted_weights(values: &[f64], t: f64) -> Vec<f64> {
    let anchor = values[pivot(values, t)];
    values.iter().map(|&a| (t * (a - anchor)).exp()).collect()
}

/// `log Σ exp(t * a_i)` without overflow.
pub(crate) fn log_sum_exp(values: &[f64], t: f64) -> f64 {
    let k = pivot(values, t);
    let anchor = values[k];
    // The pivot contributes exactly 1; sum the remainder for ln_1p.
    let rest: f64 = values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != k)
        .map(|(_, &a)| (t * (a - anchor)).exp())
        .sum();
    t * anchor + rest.ln_1p()
}

/// Normalized weights `exp(t * a_i) / Σ exp(t * a_j)`.
pub(crate) fn softmax(values: &[f64], t: f64) -> Vec<f64> {
    let mut w = tilted_weights(values, t);
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

pub(crate) fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}
