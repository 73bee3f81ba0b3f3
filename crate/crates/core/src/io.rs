//! CSV and JSON emission of engine output.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a file
//! read back parses to bit-identical values and re-runs produce bit-identical
//! files.

use crate::abc::{AbcRun, WeightedSample};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("invariant violation at {path}:{line}: {message}")]
    Invariant {
        path: String,
        line: usize,
        message: String,
    },
}

pub(crate) fn io_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Format a float with shortest round-trip precision.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        let mut s = format!("{v}");
        if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
            s.push_str(".0");
        }
        s
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        "nan".into()
    }
}

pub fn parse_f64(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        _ => s.parse().ok(),
    }
}

/// Write retained samples as CSV: one column per parameter, the weight, the
/// distance, then one column per summary coordinate. Adjusted parameter
/// columns are appended when an adjusted sample set is given.
pub fn write_samples_csv(
    path: &Path,
    theta_names: &[&str],
    samples: &[WeightedSample],
    adjusted: Option<&[WeightedSample]>,
) -> Result<(), IoError> {
    let mut file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    // failed draws carry no summary; pad them so every row has the same
    // column count
    let summary_dim = samples.iter().map(|s| s.summary.len()).max().unwrap_or(0);

    let mut header: Vec<String> = theta_names.iter().map(|s| s.to_string()).collect();
    header.push("weight".into());
    header.push("distance".into());
    for j in 0..summary_dim {
        header.push(format!("summary_{j}"));
    }
    if adjusted.is_some() {
        for name in theta_names {
            header.push(format!("adjusted_{name}"));
        }
    }
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');

    for (i, s) in samples.iter().enumerate() {
        let mut fields: Vec<String> = s.theta.iter().map(|&v| fmt_f64(v)).collect();
        fields.push(fmt_f64(s.weight));
        fields.push(fmt_f64(s.distance));
        fields.extend(s.summary.iter().map(|&v| fmt_f64(v)));
        for _ in s.summary.len()..summary_dim {
            fields.push("nan".into());
        }
        if let Some(adj) = adjusted {
            fields.extend(adj[i].theta.iter().map(|&v| fmt_f64(v)));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    file.write_all(out.as_bytes()).map_err(|e| io_err(path, e))
}

/// Read a samples CSV written by [`write_samples_csv`]. Returns the raw
/// samples and, when present, the adjusted parameter vectors.
pub fn read_samples_csv(
    path: &Path,
    n_theta: usize,
) -> Result<(Vec<WeightedSample>, Option<Vec<WeightedSample>>), IoError> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();

    let header = match lines.next() {
        Some((_, Ok(h))) if !h.trim().is_empty() => h,
        _ => {
            return Err(IoError::Parse {
                path: path.display().to_string(),
                line: 1,
                message: "empty file".into(),
            })
        }
    };
    let cols: Vec<&str> = header.split(',').collect();
    let has_adjusted = cols.iter().any(|c| c.starts_with("adjusted_"));
    let summary_dim = cols.iter().filter(|c| c.starts_with("summary_")).count();
    let expected = n_theta + 2 + summary_dim + if has_adjusted { n_theta } else { 0 };
    if cols.len() != expected {
        return Err(IoError::Parse {
            path: path.display().to_string(),
            line: 1,
            message: format!("expected {expected} columns, found {}", cols.len()),
        });
    }

    let mut samples = Vec::new();
    let mut adjusted = Vec::new();
    for (idx, line) in lines {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected {
            return Err(IoError::Parse {
                path: path.display().to_string(),
                line: lineno,
                message: format!("expected {expected} fields, found {}", fields.len()),
            });
        }
        let mut vals = Vec::with_capacity(expected);
        for f in &fields {
            match parse_f64(f) {
                Some(v) => vals.push(v),
                None => {
                    return Err(IoError::Parse {
                        path: path.display().to_string(),
                        line: lineno,
                        message: format!("bad number {f:?}"),
                    })
                }
            }
        }
        let theta = vals[0..n_theta].to_vec();
        let weight = vals[n_theta];
        let distance = vals[n_theta + 1];
        let summary = vals[n_theta + 2..n_theta + 2 + summary_dim].to_vec();
        if weight < 0.0 {
            return Err(IoError::Invariant {
                path: path.display().to_string(),
                line: lineno,
                message: format!("negative weight {weight}"),
            });
        }
        samples.push(WeightedSample {
            theta,
            weight,
            summary: summary.clone(),
            distance,
        });
        if has_adjusted {
            adjusted.push(WeightedSample {
                theta: vals[n_theta + 2 + summary_dim..].to_vec(),
                weight,
                summary,
                distance,
            });
        }
    }
    Ok((samples, if has_adjusted { Some(adjusted) } else { None }))
}

/// What the engine knows about one weighted run; embedded in the harness
/// manifest and sufficient to reproduce the run together with the config.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EngineRunRecord {
    pub seed: u64,
    pub n_samples: usize,
    pub h_quantile: f64,
    pub h_realized: f64,
    pub retained: usize,
    pub failures: usize,
}

impl EngineRunRecord {
    pub fn from_run(run: &AbcRun) -> Self {
        EngineRunRecord {
            seed: run.seed,
            n_samples: run.n_total,
            h_quantile: run.h_quantile,
            h_realized: run.h,
            retained: run.samples.len(),
            failures: run.failures.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(theta: Vec<f64>, summary: Vec<f64>) -> WeightedSample {
        WeightedSample {
            theta,
            weight: 0.25,
            summary,
            distance: 1.5e-3,
        }
    }

    #[test]
    fn csv_round_trip_is_identity() {
        let dir = std::env::temp_dir().join("abc_extremes_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("samples.csv");
        let samples = vec![
            sample(vec![1.0, 2.5, -0.125], vec![0.1, 0.2]),
            sample(vec![4.0 / 3.0, 1e-17, 3.0], vec![f64::INFINITY, -0.2]),
        ];
        let adjusted = vec![
            sample(vec![1.5, 2.0, -0.25], vec![0.1, 0.2]),
            sample(vec![0.5, 0.0, 2.5], vec![0.3, -0.2]),
        ];
        write_samples_csv(&path, &["mu", "sigma", "xi"], &samples, Some(&adjusted)).unwrap();
        let (back, back_adj) = read_samples_csv(&path, 3).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in samples.iter().zip(&back) {
            for (x, y) in a.theta.iter().zip(&b.theta) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
            for (x, y) in a.summary.iter().zip(&b.summary) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        let back_adj = back_adj.unwrap();
        for (a, b) in adjusted.iter().zip(&back_adj) {
            for (x, y) in a.theta.iter().zip(&b.theta) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn failed_draws_padded_with_nan() {
        let dir = std::env::temp_dir().join("abc_extremes_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("padded.csv");
        let mut failed = sample(vec![0.5], vec![]);
        failed.distance = f64::INFINITY;
        let samples = vec![sample(vec![1.0], vec![0.1, 0.2]), failed];
        write_samples_csv(&path, &["theta"], &samples, None).unwrap();
        let (back, _) = read_samples_csv(&path, 1).unwrap();
        assert_eq!(back[0].summary.len(), 2);
        assert!(back[1].summary.iter().all(|v| v.is_nan()));
        assert!(back[1].distance.is_infinite());
    }

    #[test]
    fn empty_file_is_parse_error() {
        let dir = std::env::temp_dir().join("abc_extremes_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("empty.csv");
        std::fs::write(&path, "").unwrap();
        assert!(matches!(
            read_samples_csv(&path, 3),
            Err(IoError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn negative_weight_is_invariant_violation() {
        let dir = std::env::temp_dir().join("abc_extremes_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.csv");
        std::fs::write(&path, "mu,weight,distance\n1.0,-0.5,0.0\n").unwrap();
        assert!(matches!(
            read_samples_csv(&path, 1),
            Err(IoError::Invariant { line: 2, .. })
        ));
    }

    #[test]
    fn shortest_round_trip_formatting() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 45.0] {
            assert_eq!(parse_f64(&fmt_f64(v)).unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert!(parse_f64("inf").unwrap().is_infinite());
    }
}
