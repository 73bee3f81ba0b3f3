//! Pilot covariance estimation for the Mahalanobis distance.
//!
//! The covariance of the summary vector is estimated by simulating `m`
//! datasets at a fixed, plausibly high-posterior-density parameter point and
//! taking the sample covariance of their summaries.

use crate::linalg::{Cholesky, Matrix};
use crate::rng::{stream_rng, StreamRng};
use crate::summary::SummaryVector;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PilotError {
    #[error("pilot needs m >= dim(s) + 1 simulations (m = {m}, dim = {dim})")]
    TooFewSimulations { m: usize, dim: usize },
    #[error("pilot simulation failed at the pilot point: {0}")]
    SimulationFailed(String),
    #[error("pilot covariance could not be regularized to positive definite")]
    Irreparable,
}

/// Sample covariance of simulated summaries, regularized to positive
/// definite when needed.
#[derive(Debug, Clone)]
pub struct PilotCovariance {
    pub matrix: Matrix,
    /// Diagonal entries that were inflated because the corresponding summary
    /// was (numerically) constant across the pilot simulations.
    pub degenerate_coords: Vec<usize>,
    /// True when a ridge had to be added for positive definiteness.
    pub regularized: bool,
}

/// Estimate the summary covariance at `theta0` from `m` simulations.
///
/// Constant summary coordinates get their diagonal entry inflated by
/// `1e-8 * trace/dim` (flagged per coordinate); if the factorization still
/// fails a ridge of the same size is added to the whole diagonal, growing
/// tenfold until the matrix factors.
pub fn pilot_covariance<D, Sim, Sum>(
    simulate: Sim,
    summarize: Sum,
    theta0: &[f64],
    m: usize,
    seed: u64,
) -> Result<PilotCovariance, PilotError>
where
    Sim: Fn(&[f64], &mut StreamRng) -> Result<D, String> + Sync,
    Sum: Fn(&D) -> SummaryVector + Sync,
    D: Send,
{
    let summaries: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            simulate(theta0, &mut rng).map(|d| summarize(&d).values)
        })
        .collect::<Result<_, String>>()
        .map_err(PilotError::SimulationFailed)?;

    let dim = summaries[0].len();
    if m < dim + 1 {
        return Err(PilotError::TooFewSimulations { m, dim });
    }

    let mut mean = vec![0.0; dim];
    for s in &summaries {
        for (acc, v) in mean.iter_mut().zip(s) {
            *acc += v;
        }
    }
    for v in &mut mean {
        *v /= m as f64;
    }

    let mut cov = Matrix::zeros(dim, dim);
    for s in &summaries {
        for i in 0..dim {
            let di = s[i] - mean[i];
            for j in i..dim {
                cov[(i, j)] += di * (s[j] - mean[j]);
            }
        }
    }
    for i in 0..dim {
        for j in i..dim {
            let v = cov[(i, j)] / (m - 1) as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }

    let base = {
        let t = cov.trace() / dim as f64;
        if t > 0.0 {
            t
        } else {
            1.0
        }
    };
    let delta = 1e-8 * base;

    let mut degenerate_coords = Vec::new();
    for i in 0..dim {
        if cov[(i, i)] <= 0.0 || cov[(i, i)] < 1e-14 * base {
            cov[(i, i)] += delta;
            degenerate_coords.push(i);
        }
    }

    let mut regularized = !degenerate_coords.is_empty();
    if Cholesky::with_pivot_tol(&cov, 1e-12).is_err() {
        let mut ridge = delta;
        let mut ok = false;
        for _ in 0..12 {
            let mut repaired = cov.clone();
            for i in 0..dim {
                repaired[(i, i)] += ridge;
            }
            if Cholesky::with_pivot_tol(&repaired, 1e-12).is_ok() {
                cov = repaired;
                ok = true;
                break;
            }
            ridge *= 10.0;
        }
        if !ok {
            return Err(PilotError::Irreparable);
        }
        regularized = true;
    }

    Ok(PilotCovariance {
        matrix: cov,
        degenerate_coords,
        regularized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summary::{SummaryScheme, SummaryVector};
    use rand::Rng;

    #[test]
    fn recovers_known_diagonal_covariance() {
        // summaries: (U(0,1), 3 + 2*U(0,1)) -> var diag (1/12, 4/12), cov 0 apart
        // from independence noise
        let pilot = pilot_covariance(
            |_theta: &[f64], rng: &mut StreamRng| {
                let a: f64 = rng.random();
                let b: f64 = rng.random();
                Ok((a, 3.0 + 2.0 * b))
            },
            |d: &(f64, f64)| SummaryVector::new(SummaryScheme::Raw, vec![d.0, d.1]),
            &[0.0],
            4_000,
            99,
        )
        .unwrap();
        assert!(!pilot.regularized);
        assert!((pilot.matrix[(0, 0)] - 1.0 / 12.0).abs() < 0.01);
        assert!((pilot.matrix[(1, 1)] - 4.0 / 12.0).abs() < 0.03);
        assert!(pilot.matrix[(0, 1)].abs() < 0.01);
    }

    #[test]
    fn constant_summary_gets_ridge() {
        let pilot = pilot_covariance(
            |_theta: &[f64], _rng: &mut StreamRng| Ok(()),
            |_d: &()| SummaryVector::new(SummaryScheme::Raw, vec![7.0, 7.0]),
            &[0.0],
            100,
            100,
        )
        .unwrap();
        assert!(pilot.regularized);
        assert_eq!(pilot.degenerate_coords, vec![0, 1]);
        assert!(pilot.matrix[(0, 0)] > 0.0);
        assert!(Cholesky::new(&pilot.matrix).is_ok());
    }

    #[test]
    fn duplicated_coordinate_detected_and_repaired() {
        let pilot = pilot_covariance(
            |_theta: &[f64], rng: &mut StreamRng| {
                let a: f64 = rng.random();
                Ok(a)
            },
            |a: &f64| SummaryVector::new(SummaryScheme::Raw, vec![*a, *a]),
            &[0.0],
            500,
            101,
        )
        .unwrap();
        assert!(pilot.regularized);
        assert!(Cholesky::new(&pilot.matrix).is_ok());
    }

    #[test]
    fn too_few_simulations_rejected() {
        let r = pilot_covariance(
            |_theta: &[f64], _rng: &mut StreamRng| Ok(()),
            |_d: &()| SummaryVector::new(SummaryScheme::Raw, vec![0.0; 10]),
            &[0.0],
            5,
            102,
        );
        assert!(matches!(r, Err(PilotError::TooFewSimulations { .. })));
    }
}
