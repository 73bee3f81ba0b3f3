//! Stationary Gaussian field sampling on a finite site set.

use super::matern::{matern_correlation, MaternParams};
use super::{MaxStableError, SiteSet};
use crate::linalg::{Cholesky, Matrix};
use crate::rng::StreamRng;
use rand_distr::{Distribution, StandardNormal};

/// Cholesky factor of the site correlation matrix, reused across every draw
/// at the same parameters.
#[derive(Debug, Clone)]
pub struct GpFactor {
    chol: Cholesky,
    pub jittered: bool,
}

impl GpFactor {
    /// Build the correlation matrix (unit diagonal, Matérn off-diagonal) and
    /// factor it. If the factorization fails, 1e-10 is added to the diagonal
    /// once; a second failure is an error.
    pub fn new(sites: &SiteSet, p: &MaternParams) -> Result<Self, MaxStableError> {
        let d = sites.len();
        let mut corr = Matrix::identity(d);
        for i in 0..d {
            for j in i + 1..d {
                let rho = matern_correlation(sites.distance(i, j), p)?;
                corr[(i, j)] = rho;
                corr[(j, i)] = rho;
            }
        }
        match Cholesky::new(&corr) {
            Ok(chol) => Ok(GpFactor {
                chol,
                jittered: false,
            }),
            Err(_) => {
                for i in 0..d {
                    corr[(i, i)] += 1e-10;
                }
                match Cholesky::new(&corr) {
                    Ok(chol) => Ok(GpFactor {
                        chol,
                        jittered: true,
                    }),
                    Err(e) => Err(MaxStableError::NotPositiveDefinite(e.to_string())),
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.chol.dim()
    }

    /// One zero-mean, unit-variance correlated draw.
    pub fn sample(&self, rng: &mut StreamRng) -> Vec<f64> {
        let z: Vec<f64> = (0..self.dim())
            .map(|_| StandardNormal.sample(rng))
            .collect();
        self.chol.lower_mul(&z)
    }
}

/// Draw one realization of the zero-mean unit-variance Gaussian field with
/// Matérn correlation on the given sites.
pub fn gp_sample(
    sites: &SiteSet,
    p: &MaternParams,
    rng: &mut StreamRng,
) -> Result<Vec<f64>, MaxStableError> {
    Ok(GpFactor::new(sites, p)?.sample(rng))
}
