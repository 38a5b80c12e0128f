//! Small shared floating-point helpers.

/// Kahan-compensated sum. The matrices here are tiny, but several contracts
/// (fraction row sums, production totals) promise residuals near machine
/// precision, so plain left-to-right summation is not good enough to lean on.
pub(crate) fn kahan_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &x in xs {
        let y = x - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Index of the largest element (first one wins on ties). Caller guarantees
/// a non-empty slice.
pub(crate) fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}
