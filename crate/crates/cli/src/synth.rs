//! Synthetic gold-standard dataset generation with truth sidecars.

use crate::config::{Config, ExperimentKind, GeometrySpec};
use crate::ingest::{
    write_field_matrix, write_geometry_sidecar, write_series, write_sites, GeometrySidecar,
};
use abc_extremes_core::evt::{gev_quantile, gev_sample, GevParams};
use abc_extremes_core::maxstable::{schlather_simulate, MaternParams, SiteSet};
use abc_extremes_core::rng::{phase_seed, stream_rng};
use abc_extremes_core::stereology::{
    simulate_ellipsoidal, simulate_spherical, InclusionShape, StereoDataset, StereoGeometry,
    StereoParams,
};
use anyhow::{bail, Context, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// RNG phase tags; each experiment phase derives its own master seed so no
/// stream is shared between phases.
pub mod phase {
    pub const SYNTH: u64 = 1;
    pub const PILOT: u64 = 2;
    pub const ABC: u64 = 3;
    pub const CLUSTER: u64 = 4;
}

/// Generating parameters written next to every synthetic dataset so that
/// recovery tests know the truth.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TruthSidecar {
    pub kind: String,
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

pub fn write_truth(path: &Path, truth: &TruthSidecar) -> Result<()> {
    let json = serde_json::to_string_pretty(truth)?;
    std::fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn read_truth(path: &Path) -> Result<TruthSidecar> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn stereo_geometry(spec: &GeometrySpec) -> Result<StereoGeometry> {
    let mut geom =
        StereoGeometry::new(spec.lx, spec.ly, spec.u, spec.v0).map_err(|e| anyhow::anyhow!(e))?;
    geom.max_expected = spec.max_expected;
    Ok(geom)
}

/// Generate the synthetic observed dataset for the configured experiment
/// into `out_dir`. Returns the list of files written.
pub fn generate_synthetic(cfg: &Config, seed: u64, out_dir: &Path) -> Result<Vec<String>> {
    std::fs::create_dir_all(out_dir)?;
    let mut rng = stream_rng(phase_seed(seed, phase::SYNTH), 0);
    let mut written = Vec::new();
    match cfg.experiment.kind {
        ExperimentKind::Gev => {
            let gev = cfg.gev.as_ref().context("missing [gev] section")?;
            let s = &gev.synthetic;
            let p = GevParams::new(s.mu, s.sigma, s.xi).map_err(|e| anyhow::anyhow!(e))?;
            let y = gev_sample(&p, s.n, &mut rng);
            let data_path = out_dir.join("observed.csv");
            write_series(&data_path, &y)?;
            written.push("observed.csv".into());
            write_truth(
                &out_dir.join("truth.json"),
                &TruthSidecar {
                    kind: "gev".into(),
                    names: vec!["mu".into(), "sigma".into(), "xi".into()],
                    values: vec![s.mu, s.sigma, s.xi],
                },
            )?;
            written.push("truth.json".into());
        }
        ExperimentKind::StereoSphere | ExperimentKind::StereoEllipsoid => {
            let stereo = cfg.stereo.as_ref().context("missing [stereo] section")?;
            let truth = stereo
                .synthetic
                .unwrap_or_else(|| Config::stereo_default_pilot(cfg.experiment.kind));
            let shape = if cfg.experiment.kind == ExperimentKind::StereoEllipsoid {
                InclusionShape::Ellipsoid
            } else {
                InclusionShape::Sphere
            };
            let p = StereoParams::new(truth[0], truth[1], truth[2], shape)
                .map_err(|e| anyhow::anyhow!(e))?;
            let geom = stereo_geometry(&stereo.geometry)?;
            let dataset: StereoDataset = match shape {
                InclusionShape::Sphere => simulate_spherical(&p, &geom, &mut rng),
                InclusionShape::Ellipsoid => simulate_ellipsoidal(&p, &geom, &mut rng),
            }
            .map_err(|e| anyhow::anyhow!(e))?;
            if dataset.n() == 0 {
                bail!("synthetic stereology dataset came out empty; adjust the geometry");
            }
            write_series(&out_dir.join("observed.csv"), &dataset.diameters)?;
            written.push("observed.csv".into());
            write_geometry_sidecar(
                &out_dir.join("observed.geometry.json"),
                &GeometrySidecar {
                    lx: stereo.geometry.lx,
                    ly: stereo.geometry.ly,
                    u: stereo.geometry.u,
                    v0: stereo.geometry.v0,
                },
            )?;
            written.push("observed.geometry.json".into());
            write_truth(
                &out_dir.join("truth.json"),
                &TruthSidecar {
                    kind: cfg.experiment.kind.name().into(),
                    names: vec!["rate".into(), "sigma".into(), "xi".into()],
                    values: truth.to_vec(),
                },
            )?;
            written.push("truth.json".into());
        }
        ExperimentKind::Maxstable => {
            let ms = cfg.maxstable.as_ref().context("missing [maxstable] section")?;
            let s = &ms.synthetic;
            // scattered station locations over the bounding extent
            let coords: Vec<(f64, f64)> = (0..s.n_sites)
                .map(|_| {
                    (
                        rng.random_range(0.0..s.extent[0]),
                        rng.random_range(0.0..s.extent[1]),
                    )
                })
                .collect();
            let sites = SiteSet::new(coords).map_err(|e| anyhow::anyhow!(e))?;
            let ids: Vec<String> = (0..s.n_sites).map(|i| format!("site_{i}")).collect();
            write_sites(&out_dir.join("sites.csv"), &ids, &sites)?;
            written.push("sites.csv".into());

            let dep = MaternParams::new(ms.c1, s.c2, s.nu).map_err(|e| anyhow::anyhow!(e))?;
            let field = schlather_simulate(&sites, &dep, s.n_blocks, &mut rng)
                .map_err(|e| anyhow::anyhow!(e))?;
            // impose GEV margins through the inverse unit-Fréchet transform
            let margins =
                GevParams::new(s.margin_mu, s.margin_sigma, s.margin_xi)
                    .map_err(|e| anyhow::anyhow!(e))?;
            let rows: Vec<Vec<f64>> = (0..field.n_blocks())
                .map(|b| {
                    (0..field.n_sites())
                        .map(|j| {
                            let u = field.blocks[(b, j)];
                            // unit-Fréchet u has CDF exp(-1/u); feed that
                            // probability through the GEV quantile
                            gev_quantile((-1.0 / u).exp(), &margins)
                        })
                        .collect()
                })
                .collect();
            write_field_matrix(&out_dir.join("field.csv"), &ids, &rows)?;
            written.push("field.csv".into());
            write_truth(
                &out_dir.join("truth.json"),
                &TruthSidecar {
                    kind: "maxstable".into(),
                    names: vec![
                        "c2".into(),
                        "nu".into(),
                        "margin_mu".into(),
                        "margin_sigma".into(),
                        "margin_xi".into(),
                    ],
                    values: vec![s.c2, s.nu, s.margin_mu, s.margin_sigma, s.margin_xi],
                },
            )?;
            written.push("truth.json".into());
        }
    }
    Ok(written)
}
