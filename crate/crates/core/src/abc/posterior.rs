//! Weighted posterior summarization: self-normalized importance estimates
//! and a weighted kernel density estimate for rendering marginals.

use super::{AbcError, WeightedSample};

fn coord_values(samples: &[WeightedSample], coord: usize) -> Vec<(f64, f64)> {
    samples
        .iter()
        .filter(|s| s.weight > 0.0)
        .map(|s| (s.theta[coord], s.weight))
        .collect()
}

fn total_weight(pairs: &[(f64, f64)]) -> f64 {
    pairs.iter().map(|(_, w)| w).sum()
}

/// Self-normalized weighted mean of one parameter coordinate.
pub fn weighted_mean(samples: &[WeightedSample], coord: usize) -> Result<f64, AbcError> {
    let pairs = coord_values(samples, coord);
    let total = total_weight(&pairs);
    if total <= 0.0 {
        return Err(AbcError::ZeroTotalWeight);
    }
    Ok(pairs.iter().map(|(x, w)| x * w).sum::<f64>() / total)
}

/// Weighted standard deviation of one parameter coordinate.
pub fn weighted_sd(samples: &[WeightedSample], coord: usize) -> Result<f64, AbcError> {
    let pairs = coord_values(samples, coord);
    let total = total_weight(&pairs);
    if total <= 0.0 {
        return Err(AbcError::ZeroTotalWeight);
    }
    let mean = pairs.iter().map(|(x, w)| x * w).sum::<f64>() / total;
    let var = pairs
        .iter()
        .map(|(x, w)| w * (x - mean) * (x - mean))
        .sum::<f64>()
        / total;
    Ok(var.sqrt())
}

/// Weighted quantile with positions that reduce to the type-7 convention
/// under equal weights: sorted value i (1-based) sits at cumulative position
/// `S_{i-1} / (T - w_i)`, interpolating linearly in between.
pub fn weighted_quantile(
    samples: &[WeightedSample],
    coord: usize,
    q: f64,
) -> Result<f64, AbcError> {
    let mut pairs = coord_values(samples, coord);
    if pairs.is_empty() {
        return Err(AbcError::ZeroTotalWeight);
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total = total_weight(&pairs);
    if pairs.len() == 1 {
        return Ok(pairs[0].0);
    }
    let q = q.clamp(0.0, 1.0);
    let mut cum_before = 0.0;
    let mut prev_pos = 0.0;
    let mut prev_val = pairs[0].0;
    for (i, &(x, w)) in pairs.iter().enumerate() {
        let denom = total - w;
        let pos = if denom > 0.0 { cum_before / denom } else { 1.0 };
        if i == 0 {
            prev_pos = pos;
            prev_val = x;
        }
        if q <= pos {
            if pos > prev_pos {
                let frac = (q - prev_pos) / (pos - prev_pos);
                return Ok(prev_val + frac * (x - prev_val));
            }
            return Ok(x);
        }
        prev_pos = pos;
        prev_val = x;
        cum_before += w;
    }
    Ok(pairs[pairs.len() - 1].0)
}

/// Weighted Gaussian kernel density estimate of one coordinate on a grid.
///
/// The bandwidth follows the weighted Silverman rule of thumb
/// `0.9 min(sd, iqr/1.34) n_eff^(-1/5)` with the effective sample size
/// `n_eff = (sum w)^2 / sum w^2`. Densities integrate to one over any grid
/// wide enough to cover the sample (to within the trapezoid error).
pub fn weighted_kde(
    samples: &[WeightedSample],
    coord: usize,
    grid: &[f64],
) -> Result<Vec<f64>, AbcError> {
    let bw = silverman_bandwidth(samples, coord)?;
    weighted_kde_with_bandwidth(samples, coord, grid, bw).map(|(d, _)| d)
}

/// Weighted Silverman bandwidth for one coordinate.
pub fn silverman_bandwidth(samples: &[WeightedSample], coord: usize) -> Result<f64, AbcError> {
    let pairs = coord_values(samples, coord);
    let total = total_weight(&pairs);
    if total <= 0.0 {
        return Err(AbcError::ZeroTotalWeight);
    }
    let sd = weighted_sd(samples, coord)?;
    let iqr = weighted_quantile(samples, coord, 0.75)? - weighted_quantile(samples, coord, 0.25)?;
    let sum_w2: f64 = pairs.iter().map(|(_, w)| w * w).sum();
    let n_eff = total * total / sum_w2;
    let mut spread = sd.min(iqr / 1.34);
    if spread <= 0.0 {
        spread = if sd > 0.0 { sd } else { 1.0 };
    }
    Ok(0.9 * spread * n_eff.powf(-0.2))
}

/// KDE at an explicit bandwidth; returns `(densities, bandwidth)`.
pub fn weighted_kde_with_bandwidth(
    samples: &[WeightedSample],
    coord: usize,
    grid: &[f64],
    bandwidth: f64,
) -> Result<(Vec<f64>, f64), AbcError> {
    if !bandwidth.is_finite() || bandwidth <= 0.0 {
        return Err(AbcError::InvalidConfig(format!(
            "bandwidth must be positive, got {bandwidth}"
        )));
    }
    let pairs = coord_values(samples, coord);
    let total = total_weight(&pairs);
    if total <= 0.0 {
        return Err(AbcError::ZeroTotalWeight);
    }
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * bandwidth * total);
    let dens = grid
        .iter()
        .map(|&g| {
            let mut acc = 0.0;
            for &(x, w) in &pairs {
                let z = (g - x) / bandwidth;
                acc += w * (-0.5 * z * z).exp();
            }
            acc * norm
        })
        .collect();
    Ok((dens, bandwidth))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ws(theta: f64, weight: f64) -> WeightedSample {
        WeightedSample {
            theta: vec![theta],
            weight,
            summary: vec![],
            distance: 0.0,
        }
    }

    #[test]
    fn mean_and_quantile_all_weight_on_one_sample() {
        let samples = vec![ws(1.0, 0.0), ws(4.2, 1.0), ws(9.0, 0.0)];
        assert_eq!(weighted_mean(&samples, 0).unwrap(), 4.2);
        for q in [0.0, 0.25, 0.5, 0.9, 1.0] {
            assert_eq!(weighted_quantile(&samples, 0, q).unwrap(), 4.2);
        }
    }

    #[test]
    fn equal_weights_match_ordinary_estimates() {
        let values = [3.0, 1.0, 4.0, 1.5, 9.0, 2.6, 5.3, 5.8];
        let samples: Vec<WeightedSample> = values.iter().map(|&v| ws(v, 0.125)).collect();
        let m = weighted_mean(&samples, 0).unwrap();
        assert!((m - crate::stats::mean(&values)).abs() < 1e-12);
        for q in [0.1, 0.25, 0.5, 0.75, 0.95] {
            let wq = weighted_quantile(&samples, 0, q).unwrap();
            let oq = crate::stats::quantile(&values, q);
            assert!((wq - oq).abs() < 1e-12, "q={q}: {wq} vs {oq}");
        }
    }

    #[test]
    fn zero_total_weight_is_error() {
        let samples = vec![ws(1.0, 0.0)];
        assert!(weighted_mean(&samples, 0).is_err());
        assert!(weighted_kde(&samples, 0, &[0.0]).is_err());
    }

    #[test]
    fn kde_single_sample_is_gaussian_bump() {
        let samples = vec![ws(2.0, 1.0)];
        let grid: Vec<f64> = (-200..=600).map(|i| i as f64 * 0.01).collect();
        let d = weighted_kde(&samples, 0, &grid).unwrap();
        // peak at the sample
        let (imax, _) = d
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert!((grid[imax] - 2.0).abs() < 0.011);
        // symmetric around it
        let at = |x: f64| {
            let i = ((x + 2.0) / 0.01).round() as usize;
            d[i]
        };
        assert!((at(2.5) - at(1.5)).abs() < 1e-9);
    }

    #[test]
    fn kde_integrates_to_one() {
        let samples: Vec<WeightedSample> = (0..200)
            .map(|i| ws((i as f64 * 0.7).sin() * 2.0, 1.0 / 200.0))
            .collect();
        let grid: Vec<f64> = (-1000..=1000).map(|i| i as f64 * 0.01).collect();
        let d = weighted_kde(&samples, 0, &grid).unwrap();
        let integral: f64 = d.windows(2).map(|w| (w[0] + w[1]) / 2.0 * 0.01).sum::<f64>()
            + d[0] * 0.0; // trapezoid over the grid
        assert!((integral - 1.0).abs() < 0.01, "integral {integral}");
    }

    #[test]
    fn equal_weights_match_plain_kde_oracle() {
        let values: Vec<f64> = (0..64).map(|i| ((i * 37) % 64) as f64 / 7.0).collect();
        let samples: Vec<WeightedSample> = values.iter().map(|&v| ws(v, 1.0)).collect();
        let grid: Vec<f64> = (-20..=120).map(|i| i as f64 * 0.1).collect();

        // plain unweighted KDE with the same rule of thumb
        let n = values.len() as f64;
        let m = crate::stats::mean(&values);
        let sd = crate::stats::variance(&values).sqrt();
        let iqr = crate::stats::quantile(&values, 0.75) - crate::stats::quantile(&values, 0.25);
        let bw = 0.9 * sd.min(iqr / 1.34) * n.powf(-0.2);
        let _ = m;
        let oracle: Vec<f64> = grid
            .iter()
            .map(|&g| {
                values
                    .iter()
                    .map(|&x| {
                        let z = (g - x) / bw;
                        (-0.5 * z * z).exp()
                    })
                    .sum::<f64>()
                    / ((2.0 * std::f64::consts::PI).sqrt() * bw * n)
            })
            .collect();

        let d = weighted_kde(&samples, 0, &grid).unwrap();
        for (a, b) in d.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
