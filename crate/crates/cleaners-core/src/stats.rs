//! Statistics helpers shared by the harness and the validation tools.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Sample mean and standard deviation (n-1 normalization). None for an
/// empty slice; a single observation has deviation 0 by convention.
pub fn mean_std(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Some((mean, var.sqrt()))
}

/// Linearly interpolated quantile (the common "type 7" definition),
/// q in [0, 1]. None for an empty slice.
pub fn percentile(xs: &[f64], q: f64) -> Option<f64> {
    if xs.is_empty() || !(0.0..=1.0).contains(&q) {
        return None;
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in percentile input"));
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

/// 95% Wilson score interval for a binomial proportion (z = 1.96).
/// Zero trials yield the vacuous interval [0, 1].
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.96f64;
    let n = trials as f64;
    let p_hat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p_hat + z2 / (2.0 * n)) / denom;
    let half = z * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub degrees_of_freedom: u64,
    pub p_value: f64,
    /// Bin count after pooling low-expectation bins.
    pub bins_used: usize,
}

/// Pearson goodness-of-fit test of observed counts against fully specified
/// expected counts. Adjacent bins are pooled until each pooled bin expects
/// at least 5 observations; a trailing underfull bin merges backwards. With
/// fewer than two pooled bins the test is vacuous (p = 1).
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> ChiSquareResult {
    assert_eq!(observed.len(), expected.len(), "bin count mismatch");
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let mut acc_obs = 0.0f64;
    let mut acc_exp = 0.0f64;
    for (&o, &e) in observed.iter().zip(expected) {
        acc_obs += o as f64;
        acc_exp += e;
        if acc_exp >= 5.0 {
            pooled.push((acc_obs, acc_exp));
            acc_obs = 0.0;
            acc_exp = 0.0;
        }
    }
    if acc_exp > 0.0 || acc_obs > 0.0 {
        if let Some(last) = pooled.last_mut() {
            last.0 += acc_obs;
            last.1 += acc_exp;
        } else {
            pooled.push((acc_obs, acc_exp));
        }
    }
    let bins_used = pooled.len();
    if bins_used < 2 {
        return ChiSquareResult {
            statistic: 0.0,
            degrees_of_freedom: 0,
            p_value: 1.0,
            bins_used,
        };
    }
    let statistic: f64 = pooled.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let df = (bins_used - 1) as u64;
    let dist = ChiSquared::new(df as f64).expect("df >= 1");
    let p_value = (1.0 - dist.cdf(statistic)).clamp(0.0, 1.0);
    ChiSquareResult {
        statistic,
        degrees_of_freedom: df,
        p_value,
        bins_used,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn mean_std_known_values() {
        let (mean, std) = mean_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).unwrap();
        assert_relative_eq!(mean, 5.0);
        assert_relative_eq!(std, (32.0f64 / 7.0).sqrt(), max_relative = 1e-12);
        assert_eq!(mean_std(&[3.5]), Some((3.5, 0.0)));
        assert_eq!(mean_std(&[]), None);
    }

    #[test]
    fn percentile_interpolates() {
        let xs: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        assert_relative_eq!(percentile(&xs, 0.0).unwrap(), 1.0);
        assert_relative_eq!(percentile(&xs, 1.0).unwrap(), 10.0);
        assert_relative_eq!(percentile(&xs, 0.5).unwrap(), 5.5);
        assert_eq!(percentile(&[], 0.5), None);
        assert_eq!(percentile(&xs, 1.5), None);
    }

    #[test]
    fn wilson_interval_matches_reference() {
        let (lo, hi) = wilson_interval(95, 100);
        assert_relative_eq!(lo, 0.888248, max_relative = 1e-5);
        assert_relative_eq!(hi, 0.978457, max_relative = 1e-5);
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
        let (lo0, _) = wilson_interval(0, 50);
        assert_eq!(lo0, 0.0);
        let (_, hi1) = wilson_interval(50, 50);
        assert_eq!(hi1, 1.0);
    }

    #[test]
    fn chi_square_uniform_fit_is_loose() {
        let r = chi_square_gof(&[10, 10, 10, 10, 10, 10], &[10.0; 6]);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.degrees_of_freedom, 5);
        assert_relative_eq!(r.p_value, 1.0);
    }

    #[test]
    fn chi_square_detects_gross_mismatch() {
        let r = chi_square_gof(&[100, 0, 0, 0], &[25.0; 4]);
        assert!(r.statistic > 250.0);
        assert!(r.p_value < 1e-6);
    }

    #[test]
    fn chi_square_pools_small_bins() {
        let r = chi_square_gof(&[1, 2, 19, 20], &[1.0, 1.0, 20.0, 20.0]);
        assert_eq!(r.bins_used, 2);
        assert_eq!(r.degrees_of_freedom, 1);
        let tail = chi_square_gof(&[10, 10, 0, 4], &[10.0, 10.0, 1.0, 1.0]);
        assert_eq!(tail.bins_used, 2);
        assert_relative_eq!(tail.statistic, 4.0 / 12.0, max_relative = 1e-12);
    }

    #[test]
    fn chi_square_single_bin_is_vacuous() {
        let r = chi_square_gof(&[3], &[3.0]);
        assert_eq!(r.degrees_of_freedom, 0);
        assert_eq!(r.p_value, 1.0);
    }
}
