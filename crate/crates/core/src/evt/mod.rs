//! Univariate extreme value distributions: GEV for block maxima, GPD for
//! threshold exceedances, the unit-Fréchet marginal transform, and the four
//! GEV summary-statistic schemes.

pub mod gold;
mod lmoments;
mod mle;

pub use gold::{gev_grid_posterior, GridPosterior};
pub use lmoments::l_moment_fit;
pub use mle::{gev_mle_fit, nelder_mead, GevFit, NelderMeadResult};

use crate::rng::{open_unit, StreamRng};
use crate::summary::{SummaryScheme, SummaryVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Shape values below this magnitude use the exact Gumbel/exponential limit
/// formulas, avoiding catastrophic cancellation near zero shape.
pub const XI_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum EvtError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("value {value} outside distribution support")]
    OutOfSupport { value: f64 },
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
}

/// GEV parameters: location, scale (> 0), shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevParams {
    pub mu: f64,
    pub sigma: f64,
    pub xi: f64,
}

impl GevParams {
    pub fn new(mu: f64, sigma: f64, xi: f64) -> Result<Self, EvtError> {
        if sigma <= 0.0 || !sigma.is_finite() || !mu.is_finite() || !xi.is_finite() {
            return Err(EvtError::InvalidParams(format!(
                "gev(mu={mu}, sigma={sigma}, xi={xi})"
            )));
        }
        Ok(GevParams { mu, sigma, xi })
    }

    /// 1 + xi (z - mu) / sigma, the support expression.
    fn t(&self, z: f64) -> f64 {
        1.0 + self.xi * (z - self.mu) / self.sigma
    }

    pub fn in_support(&self, z: f64) -> bool {
        self.xi.abs() < XI_TOL || self.t(z) > 0.0
    }

    pub fn as_vec(&self) -> Vec<f64> {
        vec![self.mu, self.sigma, self.xi]
    }
}

/// GPD parameters: threshold, scale (> 0), shape. Defined for values above
/// the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpdParams {
    pub v0: f64,
    pub sigma: f64,
    pub xi: f64,
}

impl GpdParams {
    pub fn new(v0: f64, sigma: f64, xi: f64) -> Result<Self, EvtError> {
        if sigma <= 0.0 || !sigma.is_finite() || !v0.is_finite() || !xi.is_finite() {
            return Err(EvtError::InvalidParams(format!(
                "gpd(v0={v0}, sigma={sigma}, xi={xi})"
            )));
        }
        Ok(GpdParams { v0, sigma, xi })
    }
}

/// GEV distribution function. Values outside the support clamp to 0 or 1.
pub fn gev_cdf(z: f64, p: &GevParams) -> f64 {
    if p.xi.abs() < XI_TOL {
        (-(-(z - p.mu) / p.sigma).exp()).exp()
    } else {
        let t = p.t(z);
        if t <= 0.0 {
            // below the lower endpoint for xi > 0, above the upper for xi < 0
            if p.xi > 0.0 {
                0.0
            } else {
                1.0
            }
        } else {
            (-t.powf(-1.0 / p.xi)).exp()
        }
    }
}

/// GEV quantile function (inverse CDF) for probability `p01` in (0, 1).
pub fn gev_quantile(p01: f64, p: &GevParams) -> f64 {
    let w = -p01.ln(); // in (0, inf)
    if p.xi.abs() < XI_TOL {
        p.mu - p.sigma * w.ln()
    } else {
        p.mu + p.sigma * (w.powf(-p.xi) - 1.0) / p.xi
    }
}

/// Draw `n` values by inversion.
pub fn gev_sample(p: &GevParams, n: usize, rng: &mut StreamRng) -> Vec<f64> {
    (0..n).map(|_| gev_quantile(open_unit(rng), p)).collect()
}

/// Transform GEV-distributed values to unit-Fréchet margins.
///
/// Errors if any value lies outside the support of `p`.
pub fn to_unit_frechet(z: &[f64], p: &GevParams) -> Result<Vec<f64>, EvtError> {
    z.iter()
        .map(|&zi| {
            if p.xi.abs() < XI_TOL {
                Ok(((zi - p.mu) / p.sigma).exp())
            } else {
                let t = p.t(zi);
                if t <= 0.0 {
                    Err(EvtError::OutOfSupport { value: zi })
                } else {
                    Ok(t.powf(1.0 / p.xi))
                }
            }
        })
        .collect()
}

/// GPD distribution function for exceedances above `v0`. Returns 0 at or
/// below the threshold.
pub fn gpd_cdf(v: f64, p: &GpdParams) -> f64 {
    if v <= p.v0 {
        return 0.0;
    }
    let w = v - p.v0;
    if p.xi.abs() < XI_TOL {
        1.0 - (-w / p.sigma).exp()
    } else {
        let t = 1.0 + p.xi * w / p.sigma;
        if t <= 0.0 {
            1.0 // above the upper endpoint (xi < 0)
        } else {
            1.0 - t.powf(-1.0 / p.xi)
        }
    }
}

/// GPD quantile function for probability `p01` in [0, 1).
pub fn gpd_quantile(p01: f64, p: &GpdParams) -> f64 {
    let s = 1.0 - p01;
    if p.xi.abs() < XI_TOL {
        p.v0 - p.sigma * s.ln()
    } else {
        p.v0 + p.sigma * (s.powf(-p.xi) - 1.0) / p.xi
    }
}

/// Draw `n` values by inversion.
pub fn gpd_sample(p: &GpdParams, n: usize, rng: &mut StreamRng) -> Vec<f64> {
    (0..n).map(|_| gpd_quantile(open_unit(rng), p)).collect()
}

/// Reduce a dataset to a summary vector under one of the four GEV schemes.
pub fn gev_summary(y: &[f64], scheme: SummaryScheme) -> Result<SummaryVector, EvtError> {
    let values = match scheme {
        SummaryScheme::Raw => y.to_vec(),
        SummaryScheme::OrderStats => {
            let mut v = y.to_vec();
            v.sort_by(f64::total_cmp);
            v
        }
        SummaryScheme::LMoments => l_moment_fit(y)?.as_vec(),
        SummaryScheme::Mle => gev_mle_fit(y)?.params.as_vec(),
        other => {
            return Err(EvtError::InvalidParams(format!(
                "scheme {} does not apply to univariate maxima",
                other.tag()
            )))
        }
    };
    Ok(SummaryVector::new(scheme, values))
}

/// GEV log-likelihood; `-inf` when any observation is outside the support or
/// the scale is non-positive.
pub fn gev_log_likelihood(y: &[f64], p: &GevParams) -> f64 {
    if p.sigma <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let n = y.len() as f64;
    let mut ll = -n * p.sigma.ln();
    if p.xi.abs() < XI_TOL {
        for &yi in y {
            let z = (yi - p.mu) / p.sigma;
            ll -= z + (-z).exp();
        }
    } else {
        let inv_xi = 1.0 / p.xi;
        for &yi in y {
            let t = p.t(yi);
            if t <= 0.0 {
                return f64::NEG_INFINITY;
            }
            ll -= (1.0 + inv_xi) * t.ln() + t.powf(-inv_xi);
        }
    }
    ll
}
