//! Summary-space distance metrics.

use crate::linalg::{Cholesky, Matrix};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DistanceError {
    #[error("covariance matrix is not square")]
    NotSquare,
    #[error("covariance could not be made positive definite")]
    Irreparable,
}

/// Distance between summary vectors: either the sum of absolute deviations
/// or the covariance-standardized Mahalanobis distance.
///
/// The Mahalanobis variant stores a Cholesky factor of the covariance and
/// computes each distance with a triangular solve; the covariance is never
/// inverted explicitly. A non-positive-definite input is repaired by adding
/// `1e-8 * trace/dim` to the diagonal (repeatedly, scaling up tenfold) and
/// the repair is flagged.
#[derive(Debug, Clone)]
pub enum DistanceMetric {
    L1,
    Mahalanobis {
        factor: Cholesky,
        regularized: bool,
    },
}

impl DistanceMetric {
    pub fn l1() -> Self {
        DistanceMetric::L1
    }

    pub fn mahalanobis(sigma: &Matrix) -> Result<Self, DistanceError> {
        if sigma.rows != sigma.cols {
            return Err(DistanceError::NotSquare);
        }
        match Cholesky::with_pivot_tol(sigma, 1e-12) {
            Ok(factor) => Ok(DistanceMetric::Mahalanobis {
                factor,
                regularized: false,
            }),
            Err(_) => {
                let dim = sigma.rows;
                let base = {
                    let t = sigma.trace() / dim as f64;
                    if t > 0.0 {
                        t
                    } else {
                        1.0
                    }
                };
                let mut delta = 1e-8 * base;
                for _ in 0..12 {
                    let mut repaired = sigma.clone();
                    for i in 0..dim {
                        repaired[(i, i)] += delta;
                    }
                    if let Ok(factor) = Cholesky::with_pivot_tol(&repaired, 1e-12) {
                        return Ok(DistanceMetric::Mahalanobis {
                            factor,
                            regularized: true,
                        });
                    }
                    delta *= 10.0;
                }
                Err(DistanceError::Irreparable)
            }
        }
    }

    pub fn is_regularized(&self) -> bool {
        matches!(
            self,
            DistanceMetric::Mahalanobis {
                regularized: true,
                ..
            }
        )
    }

    pub fn distance(&self, s: &[f64], s_obs: &[f64]) -> f64 {
        match self {
            DistanceMetric::L1 => l1_distance(s, s_obs),
            DistanceMetric::Mahalanobis { factor, .. } => mahalanobis(s, s_obs, factor),
        }
    }
}

/// Sum of absolute deviations.
pub fn l1_distance(s: &[f64], s_obs: &[f64]) -> f64 {
    assert_eq!(s.len(), s_obs.len(), "summary dimensions differ");
    s.iter().zip(s_obs).map(|(a, b)| (a - b).abs()).sum()
}

/// Mahalanobis distance `sqrt((s - s_obs)' Sigma^-1 (s - s_obs))` computed
/// through the Cholesky factor: solve `L u = s - s_obs`, return `|u|_2`.
pub fn mahalanobis(s: &[f64], s_obs: &[f64], factor: &Cholesky) -> f64 {
    assert_eq!(s.len(), s_obs.len(), "summary dimensions differ");
    assert_eq!(s.len(), factor.dim(), "covariance dimension differs");
    let r: Vec<f64> = s.iter().zip(s_obs).map(|(a, b)| a - b).collect();
    let u = factor.solve_lower(&r);
    u.iter().map(|x| x * x).sum::<f64>().sqrt()
}
