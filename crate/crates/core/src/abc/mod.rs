//! Generic ABC importance sampling.
//!
//! A run draws N parameter vectors from a uniform sampling box, simulates a
//! dataset for each, reduces it to a summary vector, and measures its
//! distance to the observed summary. The kernel scale is then selected
//! retrospectively as an empirical quantile of the realized distances, so
//! all N draws are stored before weighting. Draws are weighted by
//! `K_h(distance) * p(theta) / g(theta)` and returned with weights
//! normalized to sum one.
//!
//! Simulator failures (overflow guards, degenerate draws a model cannot
//! summarize) are kept as draws with infinite distance rather than being
//! resampled, which preserves the validity of the importance weights.

mod distance;
mod pilot;
mod posterior;

pub use distance::{l1_distance, mahalanobis, DistanceMetric};
pub use pilot::{pilot_covariance, PilotCovariance};
pub use posterior::{
    silverman_bandwidth, weighted_kde, weighted_kde_with_bandwidth, weighted_mean,
    weighted_quantile, weighted_sd,
};

use crate::rng::{stream_rng, StreamRng};
use crate::summary::SummaryVector;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AbcError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("summary dimension mismatch: simulated {got}, observed {expected}")]
    SummaryDimension { got: usize, expected: usize },
    #[error("all weights are zero")]
    AllRejected,
    #[error("zero total weight")]
    ZeroTotalWeight,
}

/// Axis-aligned box over parameter space. Used both as the uniform sampling
/// distribution g and as the (possibly improper) flat prior support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ParamBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, AbcError> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(AbcError::InvalidConfig("box bounds length mismatch".into()));
        }
        if lo.iter().chain(&hi).any(|v| !v.is_finite()) {
            return Err(AbcError::InvalidConfig("box bounds must be finite".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
            return Err(AbcError::InvalidConfig(
                "box lower bounds must be below upper bounds".into(),
            ));
        }
        Ok(ParamBox { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(&t, (&l, &h))| t >= l && t <= h)
    }

    pub fn sample(&self, rng: &mut StreamRng) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| rng.random_range(l..h))
            .collect()
    }
}

/// Configuration of one ABC run.
///
/// Only the uniform kernel is implemented; the kernel boundary is inclusive
/// (distance equal to the scale receives weight one), which makes the
/// retained count match the quantile definition exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AbcConfig {
    /// Number of draws N.
    pub n_samples: usize,
    /// Kernel scale selected as this empirical quantile of the N distances.
    pub h_quantile: f64,
    /// Uniform sampling box g.
    pub sampler: ParamBox,
    /// Flat prior support. `None` means an improper flat prior over all of
    /// parameter space (every draw has prior density one).
    pub prior: Option<ParamBox>,
    /// Master seed; iteration i uses RNG stream (seed, i).
    pub seed: u64,
}

impl AbcConfig {
    pub fn validate(&self) -> Result<(), AbcError> {
        if self.n_samples == 0 {
            return Err(AbcError::InvalidConfig("n_samples must be >= 1".into()));
        }
        if !(self.h_quantile > 0.0 && self.h_quantile <= 1.0) {
            return Err(AbcError::InvalidConfig(format!(
                "h_quantile must be in (0, 1], got {}",
                self.h_quantile
            )));
        }
        if let Some(prior) = &self.prior {
            if prior.dim() != self.sampler.dim() {
                return Err(AbcError::InvalidConfig(
                    "prior and sampler dimensions differ".into(),
                ));
            }
        }
        Ok(())
    }
}

/// One retained draw: parameter vector, normalized importance weight, the
/// simulated summary it produced and its distance to the observed summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightedSample {
    pub theta: Vec<f64>,
    pub weight: f64,
    pub summary: Vec<f64>,
    pub distance: f64,
}

/// A draw before weighting.
#[derive(Debug, Clone)]
struct Draw {
    theta: Vec<f64>,
    summary: Vec<f64>,
    distance: f64,
    failure: Option<String>,
}

/// All N draws of a run, stored before kernel weighting so that several
/// kernel scales can be applied to the same sample.
#[derive(Debug)]
pub struct AbcDraws {
    draws: Vec<Draw>,
    prior: Option<ParamBox>,
    seed: u64,
}

/// The weighted output of a run at one kernel scale.
#[derive(Debug, Clone)]
pub struct AbcRun {
    pub samples: Vec<WeightedSample>,
    /// Realized kernel scale.
    pub h: f64,
    /// Quantile that produced `h`.
    pub h_quantile: f64,
    /// Total number of draws N.
    pub n_total: usize,
    /// Draw indices whose simulator failed, with the offending parameter
    /// vector and the failure message.
    pub failures: Vec<(usize, Vec<f64>, String)>,
    pub seed: u64,
}

impl AbcDraws {
    /// Run the simulation loop: draw theta ~ g, simulate, summarize, measure
    /// distance. Iterations are independent and execute in parallel; results
    /// are identical for any worker count because iteration i draws from RNG
    /// stream (seed, i).
    pub fn simulate<D, Sim, Sum>(
        simulate: Sim,
        summarize: Sum,
        s_obs: &SummaryVector,
        metric: &DistanceMetric,
        cfg: &AbcConfig,
    ) -> Result<Self, AbcError>
    where
        Sim: Fn(&[f64], &mut StreamRng) -> Result<D, String> + Sync,
        Sum: Fn(&D) -> SummaryVector + Sync,
        D: Send,
    {
        cfg.validate()?;
        let expected_dim = s_obs.dim();
        let draws: Vec<Draw> = (0..cfg.n_samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(cfg.seed, i as u64);
                let theta = cfg.sampler.sample(&mut rng);
                match simulate(&theta, &mut rng) {
                    Ok(data) => {
                        let summary = summarize(&data);
                        let distance = if summary.dim() == expected_dim {
                            metric.distance(&summary.values, &s_obs.values)
                        } else {
                            f64::INFINITY
                        };
                        Draw {
                            theta,
                            summary: summary.values,
                            distance,
                            failure: None,
                        }
                    }
                    Err(msg) => Draw {
                        theta,
                        summary: Vec::new(),
                        distance: f64::INFINITY,
                        failure: Some(msg),
                    },
                }
            })
            .collect();
        Ok(AbcDraws {
            draws,
            prior: cfg.prior.clone(),
            seed: cfg.seed,
        })
    }

    pub fn n(&self) -> usize {
        self.draws.len()
    }

    pub fn distances(&self) -> Vec<f64> {
        self.draws.iter().map(|d| d.distance).collect()
    }

    /// Recompute every stored draw's distance under a different metric,
    /// reusing the simulations. Failed draws keep their infinite distance.
    pub fn redistance(&self, metric: &DistanceMetric, s_obs: &SummaryVector) -> AbcDraws {
        let draws = self
            .draws
            .iter()
            .map(|d| Draw {
                theta: d.theta.clone(),
                summary: d.summary.clone(),
                distance: if d.failure.is_some() || d.summary.len() != s_obs.dim() {
                    f64::INFINITY
                } else {
                    metric.distance(&d.summary, &s_obs.values)
                },
                failure: d.failure.clone(),
            })
            .collect();
        AbcDraws {
            draws,
            prior: self.prior.clone(),
            seed: self.seed,
        }
    }

    /// Apply the uniform kernel at the scale given by the `h_quantile`
    /// empirical quantile of the realized distances, weight by the
    /// prior-to-sampler ratio, drop zero-weight draws and normalize weights
    /// to sum one.
    pub fn select(&self, h_quantile: f64) -> Result<AbcRun, AbcError> {
        if !(h_quantile > 0.0 && h_quantile <= 1.0) {
            return Err(AbcError::InvalidConfig(format!(
                "h_quantile must be in (0, 1], got {h_quantile}"
            )));
        }
        let h = select_h(&self.distances(), h_quantile);

        let mut samples: Vec<WeightedSample> = Vec::new();
        let mut failures = Vec::new();
        for (i, d) in self.draws.iter().enumerate() {
            if let Some(msg) = &d.failure {
                failures.push((i, d.theta.clone(), msg.clone()));
            }
            // uniform kernel, boundary inclusive; g is constant over its box
            // so the weight reduces to the flat prior's indicator
            let kernel = if d.distance <= h { 1.0 } else { 0.0 };
            let prior_ok = self.prior.as_ref().is_none_or(|p| p.contains(&d.theta));
            let w = if prior_ok { kernel } else { 0.0 };
            if w > 0.0 {
                samples.push(WeightedSample {
                    theta: d.theta.clone(),
                    weight: w,
                    summary: d.summary.clone(),
                    distance: d.distance,
                });
            }
        }
        if samples.is_empty() {
            return Err(AbcError::AllRejected);
        }
        let total: f64 = samples.iter().map(|s| s.weight).sum();
        for s in &mut samples {
            s.weight /= total;
        }
        Ok(AbcRun {
            samples,
            h,
            h_quantile,
            n_total: self.draws.len(),
            failures,
            seed: self.seed,
        })
    }
}

/// Uniform kernel over (-h, h) with inclusive boundary; the proportionality
/// constant is dropped.
pub fn uniform_kernel_weight(distance: f64, h: f64) -> f64 {
    assert!(distance >= 0.0 && h > 0.0);
    if distance <= h {
        1.0
    } else {
        0.0
    }
}

/// Empirical `q`-quantile of a distance set (linear interpolation between
/// order statistics).
pub fn select_h(distances: &[f64], q: f64) -> f64 {
    assert!(!distances.is_empty());
    crate::stats::quantile(distances, q)
}

/// One-call ABC importance sampling: simulate all N draws, then weight at
/// the configured kernel scale.
pub fn run_abc<D, Sim, Sum>(
    simulate: Sim,
    summarize: Sum,
    s_obs: &SummaryVector,
    metric: &DistanceMetric,
    cfg: &AbcConfig,
) -> Result<AbcRun, AbcError>
where
    Sim: Fn(&[f64], &mut StreamRng) -> Result<D, String> + Sync,
    Sum: Fn(&D) -> SummaryVector + Sync,
    D: Send,
{
    AbcDraws::simulate(simulate, summarize, s_obs, metric, cfg)?.select(cfg.h_quantile)
}
