//! Small numerical kernels shared across modules.

/// Pairwise (cascade) summation. The split points depend only on the length,
/// so the result is reproducible for a given input order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(xs) / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&sq) / (xs.len() - 1) as f64
}

/// `log Σ exp(x_i)` shifted by the maximum. Returns the shift as well.
pub fn log_sum_exp(xs: &[f64]) -> (f64, f64) {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return (max, max);
    }
    let terms: Vec<f64> = xs.iter().map(|x| (x - max).exp()).collect();
    (max + pairwise_sum(&terms).ln(), max)
}

/// `log(2 cosh x)` without overflow.
pub fn log_2cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p()
}

/// `log cosh x` without overflow.
pub fn log_cosh(x: f64) -> f64 {
    log_2cosh(x) - std::f64::consts::LN_2
}
