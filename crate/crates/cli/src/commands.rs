//! Standalone post-processing subcommands operating on exported sample
//! files: regression adjustment and posterior summarization.

use crate::experiments::{fit_and_adjust, summarize_samples, CoordSummary};
use abc_extremes_core::abc::WeightedSample;
use abc_extremes_core::io::{read_samples_csv, write_samples_csv};
use abc_extremes_core::summary::SummaryVector;
use anyhow::{Context, Result};
use std::path::Path;

/// Number of parameter columns in a samples CSV (all columns before
/// `weight`).
pub fn infer_param_count(path: &Path) -> Result<(usize, Vec<String>)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let header = text.lines().next().context("empty samples file")?;
    let mut names = Vec::new();
    for col in header.split(',') {
        if col == "weight" {
            return Ok((names.len(), names));
        }
        names.push(col.to_string());
    }
    anyhow::bail!("samples file has no weight column")
}

pub fn load_samples(path: &Path) -> Result<(Vec<String>, Vec<WeightedSample>)> {
    let (n_theta, names) = infer_param_count(path)?;
    let (samples, _) = read_samples_csv(path, n_theta)?;
    Ok((names, samples))
}

/// Fit the local-linear model on a samples file and write the same file
/// with adjusted parameter columns appended.
pub fn adjust_command(
    samples_path: &Path,
    observed_summary_path: &Path,
    out_path: &Path,
    log_coords: &[usize],
) -> Result<usize> {
    let (names, samples) = load_samples(samples_path)?;
    let text = std::fs::read_to_string(observed_summary_path)
        .with_context(|| format!("reading {}", observed_summary_path.display()))?;
    let s_obs: SummaryVector = serde_json::from_str(&text)?;
    if samples
        .first()
        .is_none_or(|s| s.summary.len() != s_obs.dim())
    {
        anyhow::bail!(
            "samples carry {} summary columns but the observed summary has {}",
            samples.first().map_or(0, |s| s.summary.len()),
            s_obs.dim()
        );
    }
    let (_, adjusted) = fit_and_adjust(&samples, &s_obs.values, log_coords)?;
    let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    write_samples_csv(out_path, &name_refs, &samples, Some(&adjusted))?;
    Ok(adjusted.len())
}

/// Weighted posterior summary of a samples file (adjusted columns when
/// present, raw otherwise).
pub fn summarize_command(samples_path: &Path, out_path: &Path) -> Result<Vec<CoordSummary>> {
    let (n_theta, names) = infer_param_count(samples_path)?;
    let (samples, adjusted) = read_samples_csv(samples_path, n_theta)?;
    let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();

    #[derive(serde::Serialize)]
    struct Report {
        n_samples: usize,
        raw: Vec<CoordSummary>,
        adjusted: Option<Vec<CoordSummary>>,
    }
    let raw = summarize_samples(&samples, &name_refs)?;
    let adjusted_summary = adjusted
        .as_ref()
        .map(|a| summarize_samples(a, &name_refs))
        .transpose()?;
    let report = Report {
        n_samples: samples.len(),
        raw: raw.clone(),
        adjusted: adjusted_summary,
    };
    let json = serde_json::to_string_pretty(&report)?;
    std::fs::write(out_path, json + "\n")
        .with_context(|| format!("writing {}", out_path.display()))?;
    Ok(raw)
}
