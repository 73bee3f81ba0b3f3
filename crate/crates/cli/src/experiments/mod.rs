//! Experiment drivers and their shared output machinery.

mod gev;
mod maxstable;
mod stereo;

pub use gev::run_gev_experiment;
pub use maxstable::run_maxstable_experiment;
pub use stereo::run_stereo_experiment;

use abc_extremes_core::abc::{
    silverman_bandwidth, weighted_kde_with_bandwidth, weighted_mean, weighted_quantile,
    weighted_sd, WeightedSample,
};
use abc_extremes_core::io::fmt_f64;
use abc_extremes_core::regression::{adjust, fit_local_linear, LinearAdjustmentModel};
use anyhow::{Context, Result};
use serde::Serialize;
use std::path::Path;

/// One row of the long-format density export.
pub struct DensityRow {
    pub param: String,
    pub value: f64,
    pub density: f64,
    pub scheme: String,
    pub h_quantile: f64,
    pub adjusted: bool,
}

pub fn write_density_rows(path: &Path, rows: &[DensityRow]) -> Result<()> {
    let mut text = String::from("param,value,density,scheme,h_quantile,adjusted\n");
    for r in rows {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.param,
            fmt_f64(r.value),
            fmt_f64(r.density),
            r.scheme,
            fmt_f64(r.h_quantile),
            if r.adjusted { 1 } else { 0 }
        ));
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// KDE curves of every parameter marginal on the given grids, appended as
/// density rows.
#[allow(clippy::too_many_arguments)]
pub fn append_kde_rows(
    rows: &mut Vec<DensityRow>,
    samples: &[WeightedSample],
    param_names: &[&str],
    grids: &[Vec<f64>],
    scheme: &str,
    h_quantile: f64,
    adjusted: bool,
) -> Result<Vec<f64>> {
    let mut bandwidths = Vec::new();
    for (coord, name) in param_names.iter().enumerate() {
        let bw = silverman_bandwidth(samples, coord).map_err(|e| anyhow::anyhow!(e))?;
        let (dens, _) = weighted_kde_with_bandwidth(samples, coord, &grids[coord], bw)
            .map_err(|e| anyhow::anyhow!(e))?;
        bandwidths.push(bw);
        for (v, d) in grids[coord].iter().zip(dens) {
            rows.push(DensityRow {
                param: name.to_string(),
                value: *v,
                density: d,
                scheme: scheme.to_string(),
                h_quantile,
                adjusted,
            });
        }
    }
    Ok(bandwidths)
}

/// Posterior location/scale/quantile summary of one weighted sample set.
#[derive(Debug, Clone, Serialize)]
pub struct CoordSummary {
    pub param: String,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub median: f64,
    pub q975: f64,
}

pub fn summarize_samples(
    samples: &[WeightedSample],
    param_names: &[&str],
) -> Result<Vec<CoordSummary>> {
    param_names
        .iter()
        .enumerate()
        .map(|(coord, name)| {
            Ok(CoordSummary {
                param: name.to_string(),
                mean: weighted_mean(samples, coord).map_err(|e| anyhow::anyhow!(e))?,
                sd: weighted_sd(samples, coord).map_err(|e| anyhow::anyhow!(e))?,
                q025: weighted_quantile(samples, coord, 0.025).map_err(|e| anyhow::anyhow!(e))?,
                median: weighted_quantile(samples, coord, 0.5).map_err(|e| anyhow::anyhow!(e))?,
                q975: weighted_quantile(samples, coord, 0.975).map_err(|e| anyhow::anyhow!(e))?,
            })
        })
        .collect()
}

/// Midpoint-free uniform grid over an interval.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Count adjusted draws that left the parameter support. `lower_bounds[k]`
/// is the open lower bound of coordinate k when it has one.
pub fn count_support_violations(
    samples: &[WeightedSample],
    lower_bounds: &[Option<f64>],
) -> usize {
    samples
        .iter()
        .filter(|s| {
            s.theta
                .iter()
                .zip(lower_bounds)
                .any(|(&t, b)| b.is_some_and(|lo| t <= lo))
        })
        .count()
}

/// [`fit_and_adjust`] that degrades gracefully when the retained set cannot
/// support the regression (fewer samples than summary dimensions, or failed
/// draws without summaries retained at a very wide kernel): the run is
/// exported unadjusted instead of failing.
pub fn try_fit_and_adjust(
    samples: &[WeightedSample],
    s_obs: &[f64],
    log_coords: &[usize],
) -> Result<Option<Vec<WeightedSample>>> {
    use abc_extremes_core::regression::RegressionError;
    match fit_and_adjust(samples, s_obs, log_coords) {
        Ok((_, adjusted)) => Ok(Some(adjusted)),
        Err(e) => match e.downcast_ref::<RegressionError>() {
            Some(RegressionError::TooFewSamples { .. })
            | Some(RegressionError::MissingSummaries) => Ok(None),
            _ => Err(e),
        },
    }
}

/// Map the listed coordinates through ln before the regression and exp back
/// after, for positivity-constrained parameters. Identity when `coords` is
/// empty.
pub fn fit_and_adjust(
    samples: &[WeightedSample],
    s_obs: &[f64],
    log_coords: &[usize],
) -> Result<(LinearAdjustmentModel, Vec<WeightedSample>)> {
    let transform = |set: &[WeightedSample], forward: bool| -> Vec<WeightedSample> {
        set.iter()
            .map(|s| {
                let mut theta = s.theta.clone();
                for &c in log_coords {
                    theta[c] = if forward { theta[c].ln() } else { theta[c].exp() };
                }
                WeightedSample {
                    theta,
                    weight: s.weight,
                    summary: s.summary.clone(),
                    distance: s.distance,
                }
            })
            .collect()
    };

    if log_coords.is_empty() {
        let model = fit_local_linear(samples, s_obs).map_err(|e| anyhow::anyhow!(e))?;
        let adjusted = adjust(samples, &model, s_obs);
        Ok((model, adjusted))
    } else {
        let working = transform(samples, true);
        let model = fit_local_linear(&working, s_obs).map_err(|e| anyhow::anyhow!(e))?;
        let adjusted = transform(&adjust(&working, &model, s_obs), false);
        Ok((model, adjusted))
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value)?;
    std::fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))
}
