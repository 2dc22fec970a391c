//! Order-statistic medians with nonparametric confidence intervals.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("median of an empty sample")]
    Empty,
    #[error("confidence level must lie in (0, 1), got {0}")]
    Level(f64),
}

/// Median and confidence bounds, all order statistics of the sample.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MedianCi {
    pub lower: f64,
    pub median: f64,
    pub upper: f64,
}

/// Probability that a Binomial(n, 1/2) variable lies in `[l, u - 1]`.
pub fn binomial_half_coverage(n: usize, l: usize, u: usize) -> f64 {
    // ln C(n, k) accumulated incrementally; 2^-n applied in log space
    let ln_half_n = -(n as f64) * std::f64::consts::LN_2;
    let mut ln_c = 0.0f64;
    let mut total = 0.0;
    for k in 0..n.min(u.saturating_sub(1)) + 1 {
        if k > 0 {
            ln_c += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        if k >= l && k < u {
            total += (ln_c + ln_half_n).exp();
        }
    }
    total
}

/// Ranks `(l, u)` (1-indexed) of the symmetric interval around the median
/// with coverage at least `level`, or `None` when even `(1, n)` falls short.
pub fn ci_ranks(n: usize, level: f64) -> Option<(usize, usize)> {
    (1..=n / 2)
        .rev()
        .map(|l| (l, n + 1 - l))
        .find(|&(l, u)| binomial_half_coverage(n, l, u) >= level)
}

/// Sorts `samples` and returns the median (element `⌈N/2⌉`) with the
/// confidence interval from [`ci_ranks`]. Falls back to the sample minimum
/// and maximum when the sample is too small for the requested level.
pub fn median_ci(samples: &[f64], level: f64) -> Result<MedianCi, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::Empty);
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(StatsError::Level(level));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let median = v[n.div_ceil(2) - 1];
    let (lower, upper) = match ci_ranks(n, level) {
        Some((l, u)) => (v[l - 1], v[u - 1]),
        None => (v[0], v[n - 1]),
    };
    Ok(MedianCi { lower, median, upper })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_median() {
        let m = median_ci(&[5.0, 1.0, 3.0, 2.0, 4.0], 0.99).unwrap();
        assert_eq!(m.median, 3.0);
        assert_eq!((m.lower, m.upper), (1.0, 5.0));
    }

    #[test]
    fn even_median_is_lower_middle() {
        assert_eq!(median_ci(&[4.0, 1.0, 3.0, 2.0], 0.5).unwrap().median, 2.0);
    }

    #[test]
    fn mostly_infinite_gives_infinite_median() {
        let mut v = vec![f64::INFINITY; 51];
        v.extend((0..49).map(|i| i as f64));
        assert_eq!(median_ci(&v, 0.99).unwrap().median, f64::INFINITY);
    }

    #[test]
    fn errors() {
        assert_eq!(median_ci(&[], 0.99), Err(StatsError::Empty));
        assert_eq!(median_ci(&[1.0], 1.0), Err(StatsError::Level(1.0)));
    }

    #[test]
    fn coverage_matches_exact_binomial_sum() {
        // exact rational sum for n = 10
        let c: Vec<f64> = [1, 10, 45, 120, 210, 252, 210, 120, 45, 10, 1].iter().map(|x| *x as f64).collect();
        let want: f64 = c[2..8].iter().sum::<f64>() / 1024.0;
        assert!((binomial_half_coverage(10, 2, 8) - want).abs() < 1e-14);
    }

    #[test]
    fn hundred_samples_use_ranks_37_and_64() {
        assert_eq!(ci_ranks(100, 0.99), Some((37, 64)));
        assert_eq!(ci_ranks(3, 0.99), None);
    }
}
