//! The univariate GEV block-maxima experiment: ABC under each summary
//! scheme and kernel scale, benchmarked against the exact grid posterior,
//! with regression-adjusted variants of everything.

use super::{
    append_kde_rows, count_support_violations, summarize_samples, try_fit_and_adjust,
    write_density_rows, write_json, CoordSummary, DensityRow,
};
use crate::config::{param_box_from_spec, Config};
use crate::ingest::read_series;
use crate::manifest::{RunEntry, RunManifest};
use crate::synth::{generate_synthetic, phase};
use abc_extremes_core::abc::{pilot_covariance, AbcConfig, AbcDraws, DistanceMetric};
use abc_extremes_core::evt::{gev_grid_posterior, gev_mle_fit, gev_sample, gev_summary, GevParams};
use abc_extremes_core::io::{write_samples_csv, EngineRunRecord};
use abc_extremes_core::rng::{phase_seed, StreamRng};
use abc_extremes_core::summary::SummaryScheme;
use anyhow::{Context, Result};
use std::path::Path;
use std::time::Instant;

const PARAM_NAMES: [&str; 3] = ["mu", "sigma", "xi"];

/// Outputs of one (scheme, h_quantile) run kept in memory for callers that
/// want to assert on them directly (the acceptance tests do).
pub struct GevRunOutput {
    pub scheme: SummaryScheme,
    pub h_quantile: f64,
    pub run: abc_extremes_core::abc::AbcRun,
    /// Absent when too few draws were retained to fit the regression.
    pub adjusted: Option<Vec<abc_extremes_core::abc::WeightedSample>>,
    pub summary_raw: Vec<CoordSummary>,
    pub summary_adjusted: Option<Vec<CoordSummary>>,
}

pub struct GevExperimentOutput {
    pub gold: abc_extremes_core::evt::GridPosterior,
    pub runs: Vec<GevRunOutput>,
    pub manifest: RunManifest,
}

pub fn run_gev_experiment(
    cfg: &Config,
    seed: u64,
    scale: f64,
    out_dir: &Path,
) -> Result<GevExperimentOutput> {
    let started = Instant::now();
    let gev_cfg = cfg.gev.as_ref().context("missing [gev] section")?;
    std::fs::create_dir_all(out_dir)?;

    // observed data: ingest or synthesize
    let y_obs = match &gev_cfg.data {
        Some(path) => read_series(Path::new(path))?,
        None => {
            generate_synthetic(cfg, seed, out_dir)?;
            read_series(&out_dir.join("observed.csv"))?
        }
    };
    let n_obs = y_obs.len();

    let bounds = param_box_from_spec(&gev_cfg.sampler_box, &PARAM_NAMES)?;
    let n_samples = cfg.scaled_n(scale);

    // exact posterior on the sampling box
    let gold = gev_grid_posterior(&y_obs, &bounds, gev_cfg.grid);
    let grids: Vec<Vec<f64>> = (0..3).map(|c| gold.grids[c].clone()).collect();

    let mut density_rows: Vec<DensityRow> = Vec::new();
    for (coord, name) in PARAM_NAMES.iter().enumerate() {
        let (grid, dens) = gold.marginal_density(coord);
        for (v, d) in grid.iter().zip(dens) {
            density_rows.push(DensityRow {
                param: name.to_string(),
                value: *v,
                density: d,
                scheme: "gold".into(),
                h_quantile: 0.0,
                adjusted: false,
            });
        }
    }

    let mle = gev_mle_fit(&y_obs).map_err(|e| anyhow::anyhow!(e))?.params;
    let mut manifest = RunManifest::new("gev", seed, scale, cfg.hash());
    let mut outputs = Vec::new();
    let log_coords: Vec<usize> = if gev_cfg.log_transform { vec![1] } else { vec![] };

    for (scheme_idx, scheme_tag) in gev_cfg.schemes.iter().enumerate() {
        let scheme = SummaryScheme::from_tag(scheme_tag)
            .with_context(|| format!("unknown scheme {scheme_tag:?}"))?;
        let simulate = move |theta: &[f64], rng: &mut StreamRng| -> Result<Vec<f64>, String> {
            let p = GevParams::new(theta[0], theta[1], theta[2]).map_err(|e| e.to_string())?;
            Ok(gev_sample(&p, n_obs, rng))
        };
        let summarize =
            move |y: &Vec<f64>| gev_summary(y, scheme).expect("summary of simulated data");

        let s_obs = gev_summary(&y_obs, scheme).map_err(|e| anyhow::anyhow!(e))?;
        let pilot = pilot_covariance(
            simulate,
            summarize,
            &mle.as_vec(),
            gev_cfg.pilot_sims,
            phase_seed(seed, phase::PILOT + scheme_idx as u64),
        )
        .map_err(|e| anyhow::anyhow!(e))?;
        let metric =
            DistanceMetric::mahalanobis(&pilot.matrix).map_err(|e| anyhow::anyhow!(e))?;
        let cov_regularized = pilot.regularized || metric.is_regularized();

        let abc_cfg = AbcConfig {
            n_samples,
            h_quantile: cfg.abc.h_quantiles[0],
            sampler: bounds.clone(),
            prior: Some(bounds.clone()),
            seed: phase_seed(seed, phase::ABC + scheme_idx as u64),
        };
        let draws = AbcDraws::simulate(simulate, summarize, &s_obs, &metric, &abc_cfg)
            .map_err(|e| anyhow::anyhow!(e))?;

        for &h_q in &cfg.abc.h_quantiles {
            let run = draws.select(h_q).map_err(|e| anyhow::anyhow!(e))?;
            let adjusted = try_fit_and_adjust(&run.samples, &s_obs.values, &log_coords)?;

            let label = format!("{}_h{}", scheme.tag(), h_q);
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
                scheme.tag(),
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
                    scheme.tag(),
                    h_q,
                    true,
                )?;
                support_violations = count_support_violations(adj, &[None, Some(0.0), None]);
            }
            manifest.runs.push(RunEntry {
                label: label.clone(),
                engine: EngineRunRecord::from_run(&run),
                bandwidths,
                covariance_regularized: cov_regularized,
                support_violations,
            });

            outputs.push(GevRunOutput {
                scheme,
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

    // gold moments plus per-run posterior summaries for quick inspection
    #[derive(serde::Serialize)]
    struct GoldSummary {
        param: String,
        mean: f64,
        sd: f64,
    }
    #[derive(serde::Serialize)]
    struct PosteriorReport<'a> {
        gold: Vec<GoldSummary>,
        runs: Vec<RunReport<'a>>,
    }
    #[derive(serde::Serialize)]
    struct RunReport<'a> {
        label: String,
        raw: &'a [CoordSummary],
        adjusted: Option<&'a [CoordSummary]>,
    }
    let report = PosteriorReport {
        gold: (0..3)
            .map(|c| GoldSummary {
                param: PARAM_NAMES[c].to_string(),
                mean: gold.mean(c),
                sd: gold.sd(c),
            })
            .collect(),
        runs: outputs
            .iter()
            .map(|o| RunReport {
                label: format!("{}_h{}", o.scheme.tag(), o.h_quantile),
                raw: &o.summary_raw,
                adjusted: o.summary_adjusted.as_deref(),
            })
            .collect(),
    };
    write_json(&out_dir.join("posterior_summary.json"), &report)?;

    manifest.wall_clock_ms = started.elapsed().as_millis();
    manifest.write(&out_dir.join("manifest.json"))?;
    Ok(GevExperimentOutput {
        gold,
        runs: outputs,
        manifest,
    })
}
