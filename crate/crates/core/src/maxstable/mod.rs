//! Schlather max-stable process machinery: Whittle-Matérn dependence,
//! Gaussian field simulation, the spectral max-stable construction, its
//! closed-form bivariate law, and extremal-coefficient summaries built from
//! clustered site triplets.

pub mod bessel;
mod gaussian;
mod matern;
mod schlather;
mod triplets;

pub use bessel::{bessel_k, BesselError};
pub use gaussian::{gp_sample, GpFactor};
pub use matern::{extremal_coef_from_rho, matern_correlation, pairwise_extremal_coef, MaternParams};
pub use schlather::{
    schlather_bivariate_cdf, schlather_simulate, schlather_simulate_with_factor, SPECTRAL_BOUND,
    SPECTRAL_MEAN,
};
pub use triplets::{
    cluster_triplets, maxstable_summary, pair_extremal_estimate, triplet_extremal_estimate,
    TripletClustering,
};

use crate::linalg::Matrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MaxStableError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Bessel(#[from] BesselError),
    #[error("correlation matrix not positive definite after jitter: {0}")]
    NotPositiveDefinite(String),
    #[error("cluster count {k} must be between 1 and the triplet count {triplets}")]
    InvalidClusterCount { k: usize, triplets: usize },
    #[error("domain error: {0}")]
    Domain(String),
}

/// Planar site coordinates with their pairwise distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteSet {
    coords: Vec<(f64, f64)>,
}

impl SiteSet {
    pub fn new(coords: Vec<(f64, f64)>) -> Result<Self, MaxStableError> {
        if coords.is_empty() {
            return Err(MaxStableError::InvalidParams("no sites".into()));
        }
        if coords.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(MaxStableError::InvalidParams(
                "non-finite site coordinate".into(),
            ));
        }
        Ok(SiteSet { coords })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[(f64, f64)] {
        &self.coords
    }

    /// Euclidean distance between two sites.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (xi, yi) = self.coords[i];
        let (xj, yj) = self.coords[j];
        ((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt()
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                d = d.max(self.distance(i, j));
            }
        }
        d
    }
}

/// Simulated block maxima: one row per block, one column per site, all
/// entries positive with (approximately) unit-Fréchet margins.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxStableField {
    pub blocks: Matrix,
    /// Blocks where the spectral-function cap was reached.
    pub capped_blocks: usize,
}

impl MaxStableField {
    pub fn n_blocks(&self) -> usize {
        self.blocks.rows
    }

    pub fn n_sites(&self) -> usize {
        self.blocks.cols
    }

    pub fn site_column(&self, j: usize) -> Vec<f64> {
        (0..self.n_blocks()).map(|b| self.blocks[(b, j)]).collect()
    }
}
