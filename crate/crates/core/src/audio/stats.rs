//! Eight-statistic summary of a descriptor sequence.

pub const SUMMARY_NAMES: [&str; 8] = ["mean", "std", "min", "max", "p25", "p75", "skew", "kurtosis"];

/// Percentile by linear interpolation between order statistics of a sorted
/// slice (position `q * (n - 1)`).
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// `[mean, std, min, max, p25, p75, skewness, excess kurtosis]`.
///
/// Moments are population moments. A sequence whose values are all equal
/// has zero spread, skewness and kurtosis. Panics on an empty slice.
pub fn summarize(values: &[f64]) -> [f64; 8] {
    assert!(!values.is_empty(), "summarize needs at least one value");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let min = sorted[0];
    let max = sorted[sorted.len() - 1];
    if min == max {
        return [min, 0.0, min, max, min, max, 0.0, 0.0];
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in values {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let (skew, kurt) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    [
        mean,
        m2.sqrt(),
        min,
        max,
        percentile_sorted(&sorted, 0.25),
        percentile_sorted(&sorted, 0.75),
        skew,
        kurt,
    ]
}
