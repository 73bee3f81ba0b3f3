//! Dataset file formats: single-column series, stereology diameters with a
//! geometry sidecar, site lists, and block-maxima field matrices.
//!
//! Floats are written with shortest round-trip formatting so that a
//! write-then-read cycle reproduces values bit-for-bit.

use abc_extremes_core::io::{fmt_f64, parse_f64, IoError};
use abc_extremes_core::maxstable::SiteSet;
use abc_extremes_core::stereology::StereoDataset;
use serde::{Deserialize, Serialize};
use std::path::Path;

fn io_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn invariant_err(path: &Path, line: usize, message: impl Into<String>) -> IoError {
    IoError::Invariant {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Read a single-column CSV of finite values (no header).
pub fn read_series(path: &Path) -> Result<Vec<f64>, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v = parse_f64(line)
            .ok_or_else(|| parse_err(path, idx + 1, format!("bad number {line:?}")))?;
        if !v.is_finite() {
            return Err(invariant_err(path, idx + 1, format!("non-finite value {v}")));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(parse_err(path, 1, "empty file"));
    }
    Ok(out)
}

pub fn write_series(path: &Path, values: &[f64]) -> Result<(), IoError> {
    let mut text = String::new();
    for &v in values {
        text.push_str(&fmt_f64(v));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Geometry sidecar stored next to a stereology diameters file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometrySidecar {
    pub lx: f64,
    pub ly: f64,
    pub u: f64,
    pub v0: f64,
}

pub fn write_geometry_sidecar(path: &Path, geom: &GeometrySidecar) -> Result<(), IoError> {
    let json = serde_json::to_string_pretty(geom).expect("sidecar serializes");
    std::fs::write(path, json + "\n").map_err(|e| io_err(path, e))
}

pub fn read_geometry_sidecar(path: &Path) -> Result<GeometrySidecar, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, 1, e.to_string()))
}

/// Read observed inclusion diameters; every value must be positive.
pub fn read_diameters(path: &Path) -> Result<StereoDataset, IoError> {
    let values = read_series(path)?;
    for (i, &v) in values.iter().enumerate() {
        if v <= 0.0 {
            return Err(invariant_err(
                path,
                i + 1,
                format!("diameter {v} must be positive"),
            ));
        }
    }
    Ok(StereoDataset { diameters: values })
}

/// Read a site list: header `id,x,y`, one site per row.
pub fn read_sites(path: &Path) -> Result<(Vec<String>, SiteSet), IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "id,x,y" => {}
        Some((_, h)) => return Err(parse_err(path, 1, format!("expected header id,x,y, got {h:?}"))),
        None => return Err(parse_err(path, 1, "empty file")),
    }
    let mut ids = Vec::new();
    let mut coords = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(parse_err(path, idx + 1, "expected 3 fields"));
        }
        let x = parse_f64(fields[1])
            .ok_or_else(|| parse_err(path, idx + 1, format!("bad x {:?}", fields[1])))?;
        let y = parse_f64(fields[2])
            .ok_or_else(|| parse_err(path, idx + 1, format!("bad y {:?}", fields[2])))?;
        ids.push(fields[0].to_string());
        coords.push((x, y));
    }
    let sites = SiteSet::new(coords)
        .map_err(|e| invariant_err(path, 1, e.to_string()))?;
    Ok((ids, sites))
}

pub fn write_sites(path: &Path, ids: &[String], sites: &SiteSet) -> Result<(), IoError> {
    let mut text = String::from("id,x,y\n");
    for (id, (x, y)) in ids.iter().zip(sites.coords()) {
        text.push_str(&format!("{id},{},{}\n", fmt_f64(*x), fmt_f64(*y)));
    }
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Read a block-maxima matrix: header of site ids, one block per row, all
/// entries positive.
pub fn read_field_matrix(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text.lines().enumerate();
    let header = match lines.next() {
        Some((_, h)) if !h.trim().is_empty() => h,
        _ => return Err(parse_err(path, 1, "empty file")),
    };
    let ids: Vec<String> = header.split(',').map(|s| s.to_string()).collect();
    let d = ids.len();
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d {
            return Err(parse_err(
                path,
                idx + 1,
                format!("expected {d} fields, found {}", fields.len()),
            ));
        }
        let mut row = Vec::with_capacity(d);
        for f in fields {
            let v = parse_f64(f)
                .ok_or_else(|| parse_err(path, idx + 1, format!("bad number {f:?}")))?;
            if !v.is_finite() {
                return Err(invariant_err(path, idx + 1, format!("non-finite entry {v}")));
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(path, 2, "no data rows"));
    }
    Ok((ids, rows))
}

pub fn write_field_matrix(path: &Path, ids: &[String], rows: &[Vec<f64>]) -> Result<(), IoError> {
    let mut text = ids.join(",");
    text.push('\n');
    for row in rows {
        let fields: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        text.push_str(&fields.join(","));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}
