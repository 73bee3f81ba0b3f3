//! Exact GEV posterior on a dense parameter grid.
//!
//! With a flat prior over a box, the tractable GEV likelihood gives a
//! deterministic gold standard: evaluate the log-likelihood at every cell
//! midpoint of a 3-d grid, normalize with log-sum-exp, and read off
//! marginals and moments by summation.

use super::{gev_log_likelihood, GevParams};
use crate::abc::ParamBox;
use rayon::prelude::*;

/// Normalized posterior over a midpoint grid on a parameter box.
#[derive(Debug, Clone)]
pub struct GridPosterior {
    /// Cell-midpoint coordinates per parameter.
    pub grids: [Vec<f64>; 3],
    /// Cell probabilities, flattened row-major (mu, sigma, xi), summing to 1.
    pub probs: Vec<f64>,
    /// Cell widths per parameter.
    pub deltas: [f64; 3],
}

/// Evaluate the GEV posterior for data `y` under a flat prior on `bounds`.
pub fn gev_grid_posterior(y: &[f64], bounds: &ParamBox, n_grid: [usize; 3]) -> GridPosterior {
    assert_eq!(bounds.dim(), 3, "GEV grid posterior needs a 3-d box");
    let mut grids: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut deltas = [0.0; 3];
    for k in 0..3 {
        let n = n_grid[k];
        let delta = (bounds.hi[k] - bounds.lo[k]) / n as f64;
        deltas[k] = delta;
        grids[k] = (0..n)
            .map(|i| bounds.lo[k] + (i as f64 + 0.5) * delta)
            .collect();
    }

    let log_post: Vec<f64> = (0..n_grid[0])
        .into_par_iter()
        .flat_map_iter(|i| {
            let mu = grids[0][i];
            let sigma_grid = grids[1].clone();
            let xi_grid = grids[2].clone();
            let y = y.to_vec();
            sigma_grid.into_iter().flat_map(move |sigma| {
                let y = y.clone();
                let xi_grid = xi_grid.clone();
                xi_grid.into_iter().map(move |xi| {
                    gev_log_likelihood(&y, &GevParams { mu, sigma, xi })
                })
            })
        })
        .collect();

    let max_ll = log_post
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = log_post.iter().map(|&l| (l - max_ll).exp()).collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }

    GridPosterior {
        grids,
        probs,
        deltas,
    }
}

impl GridPosterior {
    fn dims(&self) -> [usize; 3] {
        [self.grids[0].len(), self.grids[1].len(), self.grids[2].len()]
    }

    /// Marginal probability of each grid point of one coordinate.
    pub fn marginal_probs(&self, coord: usize) -> Vec<f64> {
        let [n0, n1, n2] = self.dims();
        let mut out = vec![0.0; self.grids[coord].len()];
        let mut idx = 0;
        for i in 0..n0 {
            for j in 0..n1 {
                for k in 0..n2 {
                    let which = match coord {
                        0 => i,
                        1 => j,
                        _ => k,
                    };
                    out[which] += self.probs[idx];
                    idx += 1;
                }
            }
        }
        out
    }

    /// Marginal density sampled at the coordinate grid (probability divided
    /// by cell width).
    pub fn marginal_density(&self, coord: usize) -> (Vec<f64>, Vec<f64>) {
        let probs = self.marginal_probs(coord);
        let dens = probs.iter().map(|p| p / self.deltas[coord]).collect();
        (self.grids[coord].clone(), dens)
    }

    pub fn mean(&self, coord: usize) -> f64 {
        self.marginal_probs(coord)
            .iter()
            .zip(&self.grids[coord])
            .map(|(p, x)| p * x)
            .sum()
    }

    pub fn sd(&self, coord: usize) -> f64 {
        let m = self.mean(coord);
        self.marginal_probs(coord)
            .iter()
            .zip(&self.grids[coord])
            .map(|(p, x)| p * (x - m) * (x - m))
            .sum::<f64>()
            .sqrt()
    }

    /// Total probability; 1 up to rounding.
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}
