//! Run manifests: everything needed to reproduce an experiment's outputs
//! bit-for-bit (seed, scale, config hash) plus realized run diagnostics.

use abc_extremes_core::io::EngineRunRecord;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Diagnostics of one weighted run (one scheme / covariance / kernel-scale
/// combination) inside an experiment.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunEntry {
    /// Human-readable label, e.g. "mle_h0.005" or "pilot_h0.001".
    pub label: String,
    #[serde(flatten)]
    pub engine: EngineRunRecord,
    /// Silverman bandwidths used for the exported density curves, one per
    /// parameter coordinate (raw sample set).
    pub bandwidths: Vec<f64>,
    /// Covariance repair flag of the Mahalanobis metric, when used.
    pub covariance_regularized: bool,
    /// Adjusted draws that left the parameter support (scale <= 0 and the
    /// like). The adjusted sample is exported as-is; this is the audit count.
    pub support_violations: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub experiment: String,
    pub seed: u64,
    pub scale: f64,
    pub version: String,
    pub config_hash: String,
    pub runs: Vec<RunEntry>,
    /// Wall-clock duration of the experiment driver. Excluded from the
    /// reproducibility comparison; everything else must be bit-identical.
    pub wall_clock_ms: u128,
}

impl RunManifest {
    pub fn new(experiment: &str, seed: u64, scale: f64, config_hash: String) -> Self {
        RunManifest {
            experiment: experiment.to_string(),
            seed,
            scale,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash,
            runs: Vec::new(),
            wall_clock_ms: 0,
        }
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, json + "\n")
    }

    pub fn read(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    /// Equality modulo wall-clock, the one field allowed to differ between
    /// reproductions.
    pub fn reproducible_eq(&self, other: &Self) -> bool {
        let mut a = self.clone();
        let mut b = other.clone();
        a.wall_clock_ms = 0;
        b.wall_clock_ms = 0;
        a == b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_and_ignores_wall_clock() {
        let mut m = RunManifest::new("gev", 7, 10.0, "abc123".into());
        m.runs.push(RunEntry {
            label: "mle_h0.005".into(),
            engine: EngineRunRecord {
                seed: 7,
                n_samples: 100,
                h_quantile: 0.005,
                h_realized: 1.5,
                retained: 1,
                failures: 0,
            },
            bandwidths: vec![0.1, 0.2, 0.3],
            covariance_regularized: false,
            support_violations: 0,
        });
        m.wall_clock_ms = 1234;

        let dir = std::env::temp_dir().join("abc_extremes_manifest_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("manifest.json");
        m.write(&path).unwrap();
        let back = RunManifest::read(&path).unwrap();
        assert_eq!(m, back);

        let mut later = m.clone();
        later.wall_clock_ms = 9999;
        assert!(m.reproducible_eq(&later));
        later.seed = 8;
        assert!(!m.reproducible_eq(&later));
    }
}
