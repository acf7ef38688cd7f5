//! Small time-domain statistics used by the empirical BWE estimators.

/// Arithmetic mean. Zero on an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population variance (divisor N), two-pass for numerical stability.
pub fn population_variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

/// Variance captured by the alternating-sign (Nyquist) component of a
/// sequence with even length: the squared coefficient of (-1)^t.
pub fn nyquist_power(xs: &[f64]) -> f64 {
    if xs.is_empty() || !xs.len().is_multiple_of(2) {
        return 0.0;
    }
    let mut acc = 0.0;
    let mut sign = 1.0;
    for &x in xs {
        acc += sign * x;
        sign = -sign;
    }
    let c = acc / xs.len() as f64;
    c * c
}

/// Population variance with the mean and Nyquist components removed,
/// matching the frequency-domain sums that exclude the n = 0 and n = T/2
/// bins.
pub fn variance_excluding_nyquist(xs: &[f64]) -> f64 {
    population_variance(xs) - nyquist_power(xs)
}

/// Mean and sample standard deviation (divisor n-1) for replication
/// summaries; the sd is zero when fewer than two values exist.
pub fn mean_and_sample_sd(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs);
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let ss: f64 = xs.iter().map(|&x| (x - m) * (x - m)).sum();
    (m, (ss / (xs.len() - 1) as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variance_of_constant_is_zero() {
        assert_eq!(population_variance(&[3.0; 10]), 0.0);
    }

    #[test]
    fn variance_matches_hand_value() {
        // {1,2,3,4}: mean 2.5, squared deviations 2.25+0.25+0.25+2.25 = 5.
        assert!((population_variance(&[1.0, 2.0, 3.0, 4.0]) - 1.25).abs() < 1e-15);
    }

    #[test]
    fn nyquist_component_is_isolated() {
        // 2*(-1)^t over an even window carries variance 4 and nothing else.
        let xs: Vec<f64> = (0..100)
            .map(|t| 2.0 * if t % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        assert!((nyquist_power(&xs) - 4.0).abs() < 1e-12);
        assert!(variance_excluding_nyquist(&xs).abs() < 1e-12);
    }
}
