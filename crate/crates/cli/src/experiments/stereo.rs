//! The stereological inclusions experiment: ABC for (rate, sigma, xi) under
//! the spherical or ellipsoidal model, with identity and pilot-estimated
//! summary covariances, raw and regression-adjusted.

use super::{
    append_kde_rows, count_support_violations, linspace, summarize_samples, try_fit_and_adjust,
    write_density_rows, write_json, CoordSummary, DensityRow,
};
use crate::config::{param_box_from_spec, Config, CovarianceMode, ExperimentKind};
use crate::ingest::{read_diameters, read_geometry_sidecar};
use crate::manifest::{RunEntry, RunManifest};
use crate::synth::{generate_synthetic, phase, stereo_geometry};
use abc_extremes_core::abc::{pilot_covariance, AbcConfig, AbcDraws, DistanceMetric};
use abc_extremes_core::io::{write_samples_csv, EngineRunRecord};
use abc_extremes_core::linalg::Matrix;
use abc_extremes_core::rng::{phase_seed, StreamRng};
use abc_extremes_core::stereology::{
    simulate_ellipsoidal, simulate_spherical, stereo_summary, InclusionShape, StereoDataset,
    StereoGeometry, StereoParams,
};
use anyhow::{Context, Result};
use std::path::Path;
use std::time::Instant;

const PARAM_NAMES: [&str; 3] = ["rate", "sigma", "xi"];

pub struct StereoRunOutput {
    pub covariance: &'static str,
    pub h_quantile: f64,
    pub run: abc_extremes_core::abc::AbcRun,
    /// Absent when too few draws were retained to fit the regression.
    pub adjusted: Option<Vec<abc_extremes_core::abc::WeightedSample>>,
    pub summary_raw: Vec<CoordSummary>,
    pub summary_adjusted: Option<Vec<CoordSummary>>,
}

pub struct StereoExperimentOutput {
    pub s_obs: Vec<f64>,
    pub runs: Vec<StereoRunOutput>,
    pub manifest: RunManifest,
}

pub fn run_stereo_experiment(
    cfg: &Config,
    seed: u64,
    scale: f64,
    out_dir: &Path,
) -> Result<StereoExperimentOutput> {
    let started = Instant::now();
    let stereo_cfg = cfg.stereo.as_ref().context("missing [stereo] section")?;
    let kind = cfg.experiment.kind;
    let shape = if kind == ExperimentKind::StereoEllipsoid {
        InclusionShape::Ellipsoid
    } else {
        InclusionShape::Sphere
    };
    std::fs::create_dir_all(out_dir)?;

    // observed data and geometry
    let (observed, geom): (StereoDataset, StereoGeometry) = match &stereo_cfg.data {
        Some(path) => {
            let data_path = Path::new(path);
            let sidecar_path = data_path.with_extension("geometry.json");
            let side = read_geometry_sidecar(&sidecar_path)?;
            let geom = StereoGeometry::new(side.lx, side.ly, side.u, side.v0)
                .map_err(|e| anyhow::anyhow!(e))?;
            let data = read_diameters(data_path)?;
            if data.diameters.iter().any(|&y| y <= geom.u) {
                anyhow::bail!("observed diameter at or below the measurement threshold {}", geom.u);
            }
            (data, geom)
        }
        None => {
            generate_synthetic(cfg, seed, out_dir)?;
            let data = read_diameters(&out_dir.join("observed.csv"))?;
            (data, stereo_geometry(&stereo_cfg.geometry)?)
        }
    };

    let box_spec = stereo_cfg
        .sampler_box
        .clone()
        .unwrap_or_else(|| Config::stereo_default_box(kind));
    let bounds = param_box_from_spec(&box_spec, &PARAM_NAMES)?;
    let pilot_point = stereo_cfg
        .pilot_point
        .unwrap_or_else(|| Config::stereo_default_pilot(kind));

    let simulate = move |theta: &[f64], rng: &mut StreamRng| -> Result<StereoDataset, String> {
        let p = StereoParams::new(theta[0], theta[1], theta[2], shape).map_err(|e| e.to_string())?;
        match shape {
            InclusionShape::Sphere => simulate_spherical(&p, &geom, rng),
            InclusionShape::Ellipsoid => simulate_ellipsoidal(&p, &geom, rng),
        }
        .map_err(|e| e.to_string())
    };
    let summarize = |d: &StereoDataset| stereo_summary(d);

    let s_obs = stereo_summary(&observed);
    write_json(&out_dir.join("observed_summary.json"), &s_obs)?;

    // distance metrics to compare
    let mut metrics: Vec<(&'static str, DistanceMetric, bool)> = Vec::new();
    if matches!(
        stereo_cfg.covariance,
        CovarianceMode::Identity | CovarianceMode::Both
    ) {
        let m = DistanceMetric::mahalanobis(&Matrix::identity(7)).map_err(|e| anyhow::anyhow!(e))?;
        metrics.push(("identity", m, false));
    }
    if matches!(
        stereo_cfg.covariance,
        CovarianceMode::Pilot | CovarianceMode::Both
    ) {
        let pilot = pilot_covariance(
            simulate,
            summarize,
            &pilot_point,
            stereo_cfg.pilot_sims,
            phase_seed(seed, phase::PILOT),
        )
        .map_err(|e| anyhow::anyhow!(e))?;
        let m = DistanceMetric::mahalanobis(&pilot.matrix).map_err(|e| anyhow::anyhow!(e))?;
        let flagged = pilot.regularized || m.is_regularized();
        metrics.push(("pilot", m, flagged));
    }

    // one simulation pass shared by all covariance choices
    let abc_cfg = AbcConfig {
        n_samples: cfg.scaled_n(scale),
        h_quantile: cfg.abc.h_quantiles[0],
        sampler: bounds.clone(),
        prior: Some(bounds.clone()),
        seed: phase_seed(seed, phase::ABC),
    };
    let base_draws = AbcDraws::simulate(simulate, summarize, &s_obs, &metrics[0].1, &abc_cfg)
        .map_err(|e| anyhow::anyhow!(e))?;

    let grids: Vec<Vec<f64>> = (0..3)
        .map(|c| linspace(bounds.lo[c], bounds.hi[c], 161))
        .collect();
    let log_coords: Vec<usize> = if stereo_cfg.log_transform { vec![0, 1] } else { vec![] };

    let mut manifest = RunManifest::new(kind.name(), seed, scale, cfg.hash());
    let mut density_rows: Vec<DensityRow> = Vec::new();
    let mut outputs = Vec::new();

    for (cov_name, metric, cov_flagged) in &metrics {
        let draws = base_draws.redistance(metric, &s_obs);
        for &h_q in &cfg.abc.h_quantiles {
            let run = draws.select(h_q).map_err(|e| anyhow::anyhow!(e))?;
            let adjusted = try_fit_and_adjust(&run.samples, &s_obs.values, &log_coords)?;

            let label = format!("{cov_name}_h{h_q}");
            write_samples_csv(
                &out_dir.join(format!("samples_{label}.csv")),
                &PARAM_NAMES,
                &run.samples,
                adjusted.as_deref(),
            )?;
            let bandwidths = append_kde_rows(
                &mut density_rows,
                &run.samples,
                &PARAM_NAMES,
                &grids,
                cov_name,
                h_q,
                false,
            )?;
            let mut support_violations = 0;
            if let Some(adj) = &adjusted {
                append_kde_rows(
                    &mut density_rows,
                    adj,
                    &PARAM_NAMES,
                    &grids,
                    cov_name,
                    h_q,
                    true,
                )?;
                support_violations = count_support_violations(adj, &[Some(0.0), Some(0.0), None]);
            }
            manifest.runs.push(RunEntry {
                label,
                engine: EngineRunRecord::from_run(&run),
                bandwidths,
                covariance_regularized: *cov_flagged,
                support_violations,
            });
            outputs.push(StereoRunOutput {
                covariance: cov_name,
                h_quantile: h_q,
                summary_raw: summarize_samples(&run.samples, &PARAM_NAMES)?,
                summary_adjusted: adjusted
                    .as_ref()
                    .map(|a| summarize_samples(a, &PARAM_NAMES))
                    .transpose()?,
                run,
                adjusted,
            });
        }
    }

    write_density_rows(&out_dir.join("densities.csv"), &density_rows)?;

    #[derive(serde::Serialize)]
    struct RunReport<'a> {
        label: String,
        raw: &'a [CoordSummary],
        adjusted: Option<&'a [CoordSummary]>,
    }
    let report: Vec<RunReport> = outputs
        .iter()
        .map(|o| RunReport {
            label: format!("{}_h{}", o.covariance, o.h_quantile),
            raw: &o.summary_raw,
            adjusted: o.summary_adjusted.as_deref(),
        })
        .collect();
    write_json(&out_dir.join("posterior_summary.json"), &report)?;

    manifest.wall_clock_ms = started.elapsed().as_millis();
    manifest.write(&out_dir.join("manifest.json"))?;
    Ok(StereoExperimentOutput {
        s_obs: s_obs.values,
        runs: outputs,
        manifest,
    })
}
