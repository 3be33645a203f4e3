//! Small numeric helpers shared by several modules.

/// Centered moving mean with truncated windows at the edges.
///
/// For an even `window` the extra sample sits on the left.
pub fn moving_mean(x: &[f64], window: usize) -> Vec<f64> {
    let n = x.len();
    if n == 0 || window <= 1 {
        return x.to_vec();
    }
    let left = window / 2;
    let right = window - 1 - left;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    // compensated prefix sums keep long envelopes accurate
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &v in x {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        prefix.push(sum);
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(left);
            let hi = (i + right).min(n - 1);
            let count = (hi - lo + 1) as f64;
            if hi - lo < 64 {
                x[lo..=hi].iter().sum::<f64>() / count
            } else {
                (prefix[hi + 1] - prefix[lo]) / count
            }
        })
        .collect()
}

/// Mean computed relative to the first element, so that identical inputs
/// return that value exactly.
pub fn mean(x: &[f64]) -> f64 {
    match x.first() {
        None => f64::NAN,
        Some(&x0) => x0 + x.iter().map(|v| v - x0).sum::<f64>() / x.len() as f64,
    }
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_std(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return f64::NAN;
    }
    let m = mean(x);
    let ss: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (x.len() - 1) as f64).sqrt()
}

pub fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}
