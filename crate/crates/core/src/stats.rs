//! Shared statistical helpers: empirical quantiles, goodness-of-fit
//! statistics and their critical values.

/// Empirical quantile with linear interpolation between order statistics
/// (the type-7 convention: position `q (n-1)` in the sorted sample).
///
/// `sorted` must be ascending. `q` is clamped to [0, 1].
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let q = q.clamp(0.0, 1.0);
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    let frac = pos - lo as f64;
    let (lo_v, hi_v) = (sorted[lo], sorted[lo + 1]);
    // exact hits and ties short-circuit so that infinite entries (failed
    // simulator draws) cannot turn the interpolation into NaN
    if frac == 0.0 || lo_v == hi_v {
        return lo_v;
    }
    lo_v + frac * (hi_v - lo_v)
}

/// Quantile of an unsorted sample; sorts a copy.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, q)
}

/// Kolmogorov-Smirnov statistic of a sample against a CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Asymptotic KS critical value `c(alpha)/sqrt(n)`; supports the two levels
/// used by the test suites.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    let c = if alpha <= 0.01 {
        1.62762
    } else if alpha <= 0.05 {
        1.35810
    } else {
        1.22385
    };
    c / (n as f64).sqrt()
}

/// Chi-square statistic for observed counts against expected counts.
pub fn chi2_statistic(observed: &[f64], expected: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected.len());
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o - e) * (o - e) / e)
        .sum()
}

/// Upper critical value of the chi-square distribution with `dof` degrees of
/// freedom via the Wilson-Hilferty cube approximation. Adequate for the
/// goodness-of-fit bin counts used here (dof >= 10).
pub fn chi2_critical(dof: usize, alpha: f64) -> f64 {
    let z = if alpha <= 0.01 {
        2.3263478740408408
    } else if alpha <= 0.05 {
        1.6448536269514722
    } else {
        1.2815515655446004
    };
    let k = dof as f64;
    let t = 1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt();
    k * t * t * t
}

/// Mean of a slice.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population variance (divide by n).
pub fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_quantile_convention() {
        // 1..=100 at q = 0.05: position 4.95 -> 5 + 0.95*(6-5) = 5.95
        let v: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert!((quantile_sorted(&v, 0.05) - 5.95).abs() < 1e-12);
        assert_eq!(quantile_sorted(&v, 1.0), 100.0);
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
    }

    #[test]
    fn median_of_four() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert!((quantile_sorted(&v, 0.5) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn infinite_entries_never_produce_nan() {
        // position exactly on the last finite entry, next entry infinite
        let v = [1.0, 2.0, f64::INFINITY];
        assert_eq!(quantile_sorted(&v, 0.5), 2.0);
        // position strictly inside the infinite tail
        let v = [1.0, f64::INFINITY, f64::INFINITY];
        assert_eq!(quantile_sorted(&v, 0.75), f64::INFINITY);
        // interpolation from finite toward infinite
        assert_eq!(quantile_sorted(&v, 0.25), f64::INFINITY);
    }

    #[test]
    fn ks_of_exact_uniform_grid_is_small() {
        // points at (i+0.5)/n have KS = 0.5/n against U(0,1)
        let n = 1000;
        let sample: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&sample, |x| x);
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn chi2_critical_close_to_table() {
        // chi2(0.99, 49) = 74.919 from standard tables
        let c = chi2_critical(49, 0.01);
        assert!((c - 74.919).abs() < 0.5, "got {c}");
        // chi2(0.99, 99) = 134.642
        let c = chi2_critical(99, 0.01);
        assert!((c - 134.642).abs() < 0.5, "got {c}");
    }
}
