//! Experiment configuration: a TOML file validated into typed structs.

use abc_extremes_core::abc::ParamBox;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Gev,
    StereoSphere,
    StereoEllipsoid,
    Maxstable,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Gev => "gev",
            ExperimentKind::StereoSphere => "stereo-sphere",
            ExperimentKind::StereoEllipsoid => "stereo-ellipsoid",
            ExperimentKind::Maxstable => "maxstable",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
}

fn default_seed() -> u64 {
    20240801
}

fn default_out_dir() -> String {
    "runs/out".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AbcSection {
    pub n_samples: usize,
    pub h_quantiles: Vec<f64>,
}

/// Interval per named parameter, deserialized from `{ name = [lo, hi] }`.
pub type BoxSpec = std::collections::BTreeMap<String, [f64; 2]>;

pub fn param_box_from_spec(spec: &BoxSpec, order: &[&str]) -> Result<ParamBox, ConfigError> {
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for name in order {
        let bounds = spec.get(*name).ok_or_else(|| {
            ConfigError::Invalid(format!("sampler_box is missing parameter {name:?}"))
        })?;
        lo.push(bounds[0]);
        hi.push(bounds[1]);
    }
    ParamBox::new(lo, hi).map_err(|e| ConfigError::Invalid(e.to_string()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GevSection {
    #[serde(default = "default_gev_schemes")]
    pub schemes: Vec<String>,
    /// Observed single-column CSV; synthetic data is generated when absent.
    #[serde(default)]
    pub data: Option<String>,
    #[serde(default = "default_gev_box")]
    pub sampler_box: BoxSpec,
    #[serde(default = "default_pilot_sims")]
    pub pilot_sims: usize,
    #[serde(default = "default_gev_grid")]
    pub grid: [usize; 3],
    #[serde(default)]
    pub log_transform: bool,
    #[serde(default = "GevSynthetic::default")]
    pub synthetic: GevSynthetic,
}

fn default_gev_schemes() -> Vec<String> {
    vec![
        "raw".into(),
        "order-stats".into(),
        "l-moments".into(),
        "mle".into(),
    ]
}

fn default_gev_box() -> BoxSpec {
    [
        ("mu".to_string(), [30.0, 70.0]),
        ("sigma".to_string(), [5.0, 45.0]),
        ("xi".to_string(), [-0.3, 1.5]),
    ]
    .into_iter()
    .collect()
}

fn default_pilot_sims() -> usize {
    1000
}

fn default_gev_grid() -> [usize; 3] {
    [80, 80, 80]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GevSynthetic {
    pub n: usize,
    pub mu: f64,
    pub sigma: f64,
    pub xi: f64,
}

impl Default for GevSynthetic {
    fn default() -> Self {
        GevSynthetic {
            n: 49,
            mu: 45.0,
            sigma: 15.0,
            xi: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovarianceMode {
    Identity,
    Pilot,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StereoSection {
    /// Observed single-column diameters CSV with a JSON geometry sidecar
    /// next to it; synthetic data is generated when absent.
    #[serde(default)]
    pub data: Option<String>,
    #[serde(default)]
    pub sampler_box: Option<BoxSpec>,
    #[serde(default)]
    pub pilot_point: Option<[f64; 3]>,
    #[serde(default = "default_pilot_sims")]
    pub pilot_sims: usize,
    #[serde(default = "default_covariance_mode")]
    pub covariance: CovarianceMode,
    #[serde(default = "GeometrySpec::default")]
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub log_transform: bool,
    #[serde(default)]
    pub synthetic: Option<[f64; 3]>,
}

fn default_covariance_mode() -> CovarianceMode {
    CovarianceMode::Both
}

/// The block geometry defaults put the measurement threshold at the GPD
/// threshold and size the slab so the spherical pilot point yields about
/// 112 observed inclusions.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub lx: f64,
    pub ly: f64,
    pub u: f64,
    pub v0: f64,
    /// Simulation guard: parameter draws whose expected cut count exceeds
    /// this fail with infinite distance instead of being simulated.
    #[serde(default = "default_max_expected")]
    pub max_expected: f64,
}

fn default_max_expected() -> f64 {
    2e3
}

impl Default for GeometrySpec {
    fn default() -> Self {
        GeometrySpec {
            lx: 1.0,
            ly: 1.0096,
            u: 5.0,
            v0: 5.0,
            max_expected: default_max_expected(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaxstableSection {
    /// Site list CSV (id, x, y); synthetic sites when absent.
    #[serde(default)]
    pub sites: Option<String>,
    /// Observed block-maxima matrix CSV; synthetic field when absent.
    #[serde(default)]
    pub field: Option<String>,
    #[serde(default = "default_maxstable_box")]
    pub sampler_box: BoxSpec,
    #[serde(default = "default_c1")]
    pub c1: f64,
    #[serde(default = "default_clusters")]
    pub clusters: usize,
    #[serde(default = "default_rho_grid")]
    pub rho_grid_points: usize,
    #[serde(default = "MaxstableSynthetic::default")]
    pub synthetic: MaxstableSynthetic,
}

fn default_maxstable_box() -> BoxSpec {
    [
        ("c2".to_string(), [0.0, 7.0]),
        ("nu".to_string(), [0.0, 7.0]),
    ]
    .into_iter()
    .collect()
}

fn default_c1() -> f64 {
    1.0
}

fn default_clusters() -> usize {
    20
}

fn default_rho_grid() -> usize {
    50
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaxstableSynthetic {
    pub n_sites: usize,
    pub n_blocks: usize,
    pub extent: [f64; 2],
    pub c2: f64,
    pub nu: f64,
    /// GEV margins applied to the synthetic field at every site.
    pub margin_mu: f64,
    pub margin_sigma: f64,
    pub margin_xi: f64,
}

impl Default for MaxstableSynthetic {
    fn default() -> Self {
        MaxstableSynthetic {
            n_sites: 39,
            n_blocks: 115,
            extent: [10.0, 8.0],
            c2: 3.0,
            nu: 1.0,
            margin_mu: 30.0,
            margin_sigma: 5.0,
            margin_xi: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Config {
    pub experiment: ExperimentSection,
    pub abc: AbcSection,
    #[serde(default)]
    pub gev: Option<GevSection>,
    #[serde(default)]
    pub stereo: Option<StereoSection>,
    #[serde(default)]
    pub maxstable: Option<MaxstableSection>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        let cfg: Config = toml::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.abc.n_samples == 0 {
            return Err(ConfigError::Invalid("abc.n_samples must be >= 1".into()));
        }
        if self.abc.h_quantiles.is_empty() {
            return Err(ConfigError::Invalid("abc.h_quantiles is empty".into()));
        }
        for &q in &self.abc.h_quantiles {
            if !(q > 0.0 && q <= 1.0) {
                return Err(ConfigError::Invalid(format!(
                    "h_quantile {q} outside (0, 1]"
                )));
            }
        }
        match self.experiment.kind {
            ExperimentKind::Gev => {
                let gev = self
                    .gev
                    .as_ref()
                    .ok_or_else(|| ConfigError::Invalid("missing [gev] section".into()))?;
                for s in &gev.schemes {
                    if abc_extremes_core::summary::SummaryScheme::from_tag(s).is_none()
                        || !matches!(s.as_str(), "raw" | "order-stats" | "l-moments" | "mle")
                    {
                        return Err(ConfigError::Invalid(format!("unknown gev scheme {s:?}")));
                    }
                }
                param_box_from_spec(&gev.sampler_box, &["mu", "sigma", "xi"])?;
            }
            ExperimentKind::StereoSphere | ExperimentKind::StereoEllipsoid => {
                let stereo = self
                    .stereo
                    .as_ref()
                    .ok_or_else(|| ConfigError::Invalid("missing [stereo] section".into()))?;
                if let Some(spec) = &stereo.sampler_box {
                    param_box_from_spec(spec, &["rate", "sigma", "xi"])?;
                }
                let g = stereo.geometry;
                if !(g.lx > 0.0 && g.ly > 0.0 && g.u >= 0.0) {
                    return Err(ConfigError::Invalid("bad stereo geometry".into()));
                }
            }
            ExperimentKind::Maxstable => {
                let ms = self
                    .maxstable
                    .as_ref()
                    .ok_or_else(|| ConfigError::Invalid("missing [maxstable] section".into()))?;
                param_box_from_spec(&ms.sampler_box, &["c2", "nu"])?;
                if !(0.0..=1.0).contains(&ms.c1) {
                    return Err(ConfigError::Invalid(format!("c1 {} outside [0,1]", ms.c1)));
                }
                if ms.clusters == 0 {
                    return Err(ConfigError::Invalid("clusters must be >= 1".into()));
                }
            }
        }
        Ok(())
    }

    /// Paper-scale sampler box defaults per stereo model.
    pub fn stereo_default_box(kind: ExperimentKind) -> BoxSpec {
        let (rate_lo, rate_hi) = match kind {
            ExperimentKind::StereoEllipsoid => (60.0, 130.0),
            _ => (10.0, 80.0),
        };
        [
            ("rate".to_string(), [rate_lo, rate_hi]),
            ("sigma".to_string(), [0.0, 10.0]),
            ("xi".to_string(), [-3.0, 3.0]),
        ]
        .into_iter()
        .collect()
    }

    /// Default pilot point per stereo model.
    pub fn stereo_default_pilot(kind: ExperimentKind) -> [f64; 3] {
        match kind {
            ExperimentKind::StereoEllipsoid => [95.0, 1.9, -0.1],
            _ => [30.0, 1.5, -0.05],
        }
    }

    /// Stable hash of the parsed config for the run manifest. The output
    /// directory is excluded: where results are written has no bearing on
    /// what they contain.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut normalized = self.clone();
        normalized.experiment.out_dir = String::new();
        let canonical = serde_json::to_string(&normalized).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Divide the sample budget by a desk-scale factor (at least 1 sample).
    pub fn scaled_n(&self, scale: f64) -> usize {
        ((self.abc.n_samples as f64 / scale).round() as usize).max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_gev_config_parses_with_defaults() {
        let text = r#"
            [experiment]
            kind = "gev"

            [abc]
            n_samples = 1000
            h_quantiles = [0.15, 0.05, 0.005]

            [gev]
        "#;
        let cfg: Config = toml::from_str(text).unwrap();
        cfg.validate().unwrap();
        let gev = cfg.gev.unwrap();
        assert_eq!(gev.schemes.len(), 4);
        assert_eq!(gev.synthetic.n, 49);
        assert_eq!(gev.grid, [80, 80, 80]);
        assert_eq!(gev.sampler_box["mu"], [30.0, 70.0]);
        assert_eq!(gev.sampler_box["xi"], [-0.3, 1.5]);
    }

    #[test]
    fn rejects_bad_quantile_and_missing_section() {
        let text = r#"
            [experiment]
            kind = "gev"
            [abc]
            n_samples = 10
            h_quantiles = [1.5]
            [gev]
        "#;
        let cfg: Config = toml::from_str(text).unwrap();
        assert!(cfg.validate().is_err());

        let text = r#"
            [experiment]
            kind = "maxstable"
            [abc]
            n_samples = 10
            h_quantiles = [0.01]
        "#;
        let cfg: Config = toml::from_str(text).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let text = r#"
            [experiment]
            kind = "gev"
            [abc]
            n_samples = 1000
            h_quantiles = [0.05]
            [gev]
        "#;
        let a: Config = toml::from_str(text).unwrap();
        let b: Config = toml::from_str(text).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c: Config = toml::from_str(&text.replace("1000", "2000")).unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn scaled_n_rounds_and_floors() {
        let text = r#"
            [experiment]
            kind = "gev"
            [abc]
            n_samples = 1000000
            h_quantiles = [0.05]
            [gev]
        "#;
        let cfg: Config = toml::from_str(text).unwrap();
        assert_eq!(cfg.scaled_n(1.0), 1_000_000);
        assert_eq!(cfg.scaled_n(100.0), 10_000);
        assert_eq!(cfg.scaled_n(1e12), 1);
    }

    #[test]
    fn stereo_defaults_match_models() {
        let sphere = Config::stereo_default_box(ExperimentKind::StereoSphere);
        assert_eq!(sphere["rate"], [10.0, 80.0]);
        let ell = Config::stereo_default_box(ExperimentKind::StereoEllipsoid);
        assert_eq!(ell["rate"], [60.0, 130.0]);
        assert_eq!(
            Config::stereo_default_pilot(ExperimentKind::StereoSphere),
            [30.0, 1.5, -0.05]
        );
        assert_eq!(
            Config::stereo_default_pilot(ExperimentKind::StereoEllipsoid),
            [95.0, 1.9, -0.1]
        );
    }
}
