//! GEV parameter estimation from sample L-moments.
//!
//! Probability-weighted moments b0, b1, b2 of the ordered sample feed
//! Hosking's closed-form GEV inversion, with the standard rational
//! approximation for the shape from the L-skewness.

use super::{EvtError, GevParams, XI_TOL};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Unbiased probability-weighted moments b0, b1, b2.
pub(crate) fn pwm(y_sorted: &[f64]) -> (f64, f64, f64) {
    let n = y_sorted.len();
    let nf = n as f64;
    let mut b0 = 0.0;
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for (idx, &v) in y_sorted.iter().enumerate() {
        let j = (idx + 1) as f64; // rank, 1-based
        b0 += v;
        b1 += (j - 1.0) / (nf - 1.0) * v;
        b2 += (j - 1.0) * (j - 2.0) / ((nf - 1.0) * (nf - 2.0)) * v;
    }
    (b0 / nf, b1 / nf, b2 / nf)
}

/// Fit a GEV by the method of L-moments.
///
/// Needs at least 4 observations; errors on a degenerate (constant) sample.
pub fn l_moment_fit(y: &[f64]) -> Result<GevParams, EvtError> {
    if y.len() < 4 {
        return Err(EvtError::InvalidParams(format!(
            "l-moment fit needs n >= 4, got {}",
            y.len()
        )));
    }
    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);

    let (b0, b1, b2) = pwm(&sorted);
    let l1 = b0;
    let l2 = 2.0 * b1 - b0;
    let l3 = 6.0 * b2 - 6.0 * b1 + b0;
    if l2 <= 0.0 {
        return Err(EvtError::DegenerateSample(
            "second L-moment is not positive".into(),
        ));
    }
    let t3 = l3 / l2;

    // Hosking's rational approximation, in his shape convention k = -xi.
    let c = 2.0 / (3.0 + t3) - std::f64::consts::LN_2 / 3.0f64.ln();
    let k = 7.8590 * c + 2.9554 * c * c;

    let (mu, sigma) = if k.abs() < XI_TOL {
        let sigma = l2 / std::f64::consts::LN_2;
        (l1 - sigma * EULER_GAMMA, sigma)
    } else {
        let g = libm::tgamma(1.0 + k);
        let sigma = l2 * k / ((1.0 - 2.0f64.powf(-k)) * g);
        let mu = l1 - sigma * (1.0 - g) / k;
        (mu, sigma)
    };

    GevParams::new(mu, sigma, -k)
}
