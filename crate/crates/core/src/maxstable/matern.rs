//! Whittle-Matérn correlation and the pairwise extremal coefficient it
//! implies for the extremal Gaussian process.

use super::bessel::{bessel_k, BesselError};
use super::MaxStableError;
use serde::{Deserialize, Serialize};

/// Whittle-Matérn parameters: nugget in [0, 1], range > 0, smoothness > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaternParams {
    pub c1: f64,
    pub c2: f64,
    pub nu: f64,
}

impl MaternParams {
    pub fn new(c1: f64, c2: f64, nu: f64) -> Result<Self, MaxStableError> {
        if !(0.0..=1.0).contains(&c1) || c1.is_nan() || c2 <= 0.0 || nu <= 0.0 {
            return Err(MaxStableError::InvalidParams(format!(
                "matern(c1={c1}, c2={c2}, nu={nu})"
            )));
        }
        if !c2.is_finite() || !nu.is_finite() {
            return Err(MaxStableError::InvalidParams(format!(
                "matern(c1={c1}, c2={c2}, nu={nu})"
            )));
        }
        Ok(MaternParams { c1, c2, nu })
    }
}

/// Whittle-Matérn correlation
/// `c1 2^(1-nu) / Gamma(nu) (h/c2)^nu K_nu(h/c2)`, with the continuous
/// limit `c1` at h = 0.
///
/// The severe argument ranges are resolved analytically: when
/// `x = h/c2` is so small that `(x/2)^(2 nu)` is far below machine
/// precision the correlation is `c1` to double accuracy, and when K
/// underflows (huge x) the correlation is 0.
pub fn matern_correlation(h: f64, p: &MaternParams) -> Result<f64, MaxStableError> {
    if h.is_nan() || h < 0.0 {
        return Err(MaxStableError::InvalidParams(format!("distance {h}")));
    }
    if h == 0.0 {
        return Ok(p.c1);
    }
    let x = h / p.c2;
    if p.nu * (2.0 / x).ln() > 690.0 {
        // correction term (x/2)^(2 nu) below 1e-300
        return Ok(p.c1);
    }
    match bessel_k(p.nu, x) {
        Ok(k) => {
            let pref = (2.0f64).powf(1.0 - p.nu) / libm::tgamma(p.nu) * x.powf(p.nu);
            Ok(p.c1 * pref * k)
        }
        Err(BesselError::Underflow(_)) => Ok(0.0),
        Err(BesselError::Overflow { .. }) => Ok(p.c1),
        Err(e) => Err(MaxStableError::Bessel(e)),
    }
}

/// Pairwise extremal coefficient of the extremal Gaussian process:
/// `1 + sqrt((1 - rho(h)) / 2)`, between 1 (complete dependence) and 2
/// (the independence bound).
pub fn pairwise_extremal_coef(h: f64, p: &MaternParams) -> Result<f64, MaxStableError> {
    let rho = matern_correlation(h, p)?;
    Ok(extremal_coef_from_rho(rho))
}

/// Same map applied to a raw correlation value.
pub fn extremal_coef_from_rho(rho: f64) -> f64 {
    1.0 + ((1.0 - rho) / 2.0).max(0.0).sqrt()
}
