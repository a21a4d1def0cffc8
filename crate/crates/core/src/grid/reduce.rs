//! Deterministic reductions over grid samples.

use super::Sample;

/// Neumaier-compensated sum in iteration order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Max modulus over the listed points.
pub fn max_norm_at<T: Sample>(values: &[T], points: &[usize]) -> f64 {
    points
        .iter()
        .map(|&i| values[i].modulus())
        .fold(0.0, f64::max)
}

pub fn max_norm<T: Sample>(values: &[T]) -> f64 {
    values.iter().map(|v| v.modulus()).fold(0.0, f64::max)
}

/// Pearson correlation of two equally long samples; 1 when both are constant and equal.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n == 0 {
        return 0.0;
    }
    let mean_a = compensated_sum(a[..n].iter().copied()) / n as f64;
    let mean_b = compensated_sum(b[..n].iter().copied()) / n as f64;
    let cov = compensated_sum((0..n).map(|i| (a[i] - mean_a) * (b[i] - mean_b)));
    let va = compensated_sum((0..n).map(|i| (a[i] - mean_a).powi(2)));
    let vb = compensated_sum((0..n).map(|i| (b[i] - mean_b).powi(2)));
    if va == 0.0 || vb == 0.0 {
        return if va == vb { 1.0 } else { 0.0 };
    }
    cov / (va.sqrt() * vb.sqrt())
}

/// Successive ratios e[k] / e[k+1] of a refinement sequence.
pub fn refinement_ratios(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| w[0] / w[1]).collect()
}
