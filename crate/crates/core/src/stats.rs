//! Small shared statistics helpers used by the load generator, the metrics
//! collector and the modeling layer.

use crate::num::{real_usize, Real};

/// Nearest-rank percentile of an unsorted sample, `p` in `(0, 1]`.
/// Returns `None` for an empty sample or `p` out of range.
pub fn percentile_nearest_rank<R: Real>(values: &[R], p: R) -> Option<R> {
    if values.is_empty() || !(p > R::zero() && p <= R::one()) {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("percentile input must not contain NaN"));
    let n = sorted.len();
    let rank = (p * real_usize::<R>(n)).ceil().to_usize().unwrap_or(n).clamp(1, n);
    Some(sorted[rank - 1])
}

/// Quantile with linear interpolation between order statistics (the common
/// spreadsheet/NumPy default). Used for the IQR outlier fences.
pub fn quantile_linear<R: Real>(values: &[R], q: R) -> Option<R> {
    if values.is_empty() || !(q >= R::zero() && q <= R::one()) {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("quantile input must not contain NaN"));
    let n = sorted.len();
    if n == 1 {
        return Some(sorted[0]);
    }
    let h = q * real_usize::<R>(n - 1);
    let lo = h.floor().to_usize().unwrap_or(0).min(n - 1);
    let hi = (lo + 1).min(n - 1);
    let frac = h - real_usize::<R>(lo);
    Some(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

pub fn mean<R: Real>(values: &[R]) -> Option<R> {
    if values.is_empty() {
        return None;
    }
    let sum = values.iter().fold(R::zero(), |acc, &v| acc + v);
    Some(sum / real_usize(values.len()))
}

/// Population variance.
pub fn variance<R: Real>(values: &[R]) -> Option<R> {
    let m = mean(values)?;
    let ss = values.iter().fold(R::zero(), |acc, &v| acc + (v - m) * (v - m));
    Some(ss / real_usize(values.len()))
}

pub fn std_dev<R: Real>(values: &[R]) -> Option<R> {
    variance(values).map(|v| v.sqrt())
}

/// Ordinary least squares for a single predictor: returns `(slope,
/// intercept, r_squared)`. Used for trend checks and for the memory-usage
/// imputer.
pub fn simple_linear_fit<R: Real>(x: &[R], y: &[R]) -> Option<(R, R, R)> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let mx = mean(x)?;
    let my = mean(y)?;
    let mut sxx = R::zero();
    let mut sxy = R::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    if sxx == R::zero() {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;

    let mut ss_res = R::zero();
    let mut ss_tot = R::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        let pred = intercept + slope * xi;
        ss_res += (yi - pred) * (yi - pred);
        ss_tot += (yi - my) * (yi - my);
    }
    let r2 = if ss_tot == R::zero() { R::one() } else { R::one() - ss_res / ss_tot };
    Some((slope, intercept, r2))
}

/// Convenience: fraction `p` of `n`, rounded to nearest count.
pub fn fraction_of<R: Real>(n: usize, p: R) -> usize {
    (p * real_usize::<R>(n)).round().to_usize().unwrap_or(0).min(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_on_1_to_100_p95_is_95() {
        let values: Vec<f64> = (1..=100).map(|v| v as f64).collect();
        assert_eq!(percentile_nearest_rank(&values, 0.95), Some(95.0));
    }

    #[test]
    fn nearest_rank_constant_series() {
        let values = vec![100.0f64; 32];
        assert_eq!(percentile_nearest_rank(&values, 0.95), Some(100.0));
    }

    #[test]
    fn nearest_rank_empty_is_none() {
        assert_eq!(percentile_nearest_rank::<f64>(&[], 0.95), None);
    }

    #[test]
    fn quartiles_match_hand_computation() {
        // Linear interpolation on [1,2,3,4]: q1 at h=0.75 -> 1.75, q3 at
        // h=2.25 -> 3.25.
        let values = vec![1.0f64, 2.0, 3.0, 4.0];
        assert!((quantile_linear(&values, 0.25).unwrap() - 1.75).abs() < 1e-12);
        assert!((quantile_linear(&values, 0.75).unwrap() - 3.25).abs() < 1e-12);
    }

    #[test]
    fn simple_fit_recovers_line() {
        let x = vec![1.0f64, 2.0, 3.0, 4.0];
        let y = vec![3.0, 5.0, 7.0, 9.0];
        let (slope, intercept, r2) = simple_linear_fit(&x, &y).unwrap();
        assert!((slope - 2.0).abs() < 1e-12);
        assert!((intercept - 1.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generic_over_f32_too() {
        let values: Vec<f32> = (1..=100).map(|v| v as f32).collect();
        assert_eq!(percentile_nearest_rank(&values, 0.95f32), Some(95.0f32));
    }
}
