//! Local-linear regression adjustment of ABC output.
//!
//! The retained draws `(theta_i, s_i, w_i)` are modelled near the observed
//! summary as `theta = alpha + beta' s + noise`; the fitted mean function is
//! then used to shift every draw to where it would have been had its summary
//! matched the observation: `theta* = m(s_obs) + (theta - m(s))`. Weights
//! are untouched.
//!
//! The weighted least-squares solve centers summaries at `s_obs` and scales
//! them by the retained-sample standard deviation for conditioning, then
//! un-standardizes the coefficients. Collinear (and constant) summary
//! columns are dropped: their coefficients are zero and their indices are
//! reported.

use crate::abc::WeightedSample;
use crate::linalg::{Cholesky, Matrix};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RegressionError {
    #[error("need more retained samples than summary dimensions ({retained} <= {dim})")]
    TooFewSamples { retained: usize, dim: usize },
    #[error("total weight is zero")]
    ZeroTotalWeight,
    #[error("samples carry no summaries")]
    MissingSummaries,
}

/// Fitted linear mean function `m(s) = alpha + beta' s` for each parameter
/// coordinate.
#[derive(Debug, Clone)]
pub struct LinearAdjustmentModel {
    /// Intercepts, one per parameter coordinate.
    pub alpha: Vec<f64>,
    /// Coefficients, `beta[k][j]` for parameter k and summary j.
    pub beta: Vec<Vec<f64>>,
    /// Summary columns dropped as constant or collinear.
    pub dropped_columns: Vec<usize>,
}

impl LinearAdjustmentModel {
    pub fn predict(&self, s: &[f64]) -> Vec<f64> {
        self.alpha
            .iter()
            .zip(&self.beta)
            .map(|(&a, b)| a + b.iter().zip(s).map(|(&bj, &sj)| bj * sj).sum::<f64>())
            .collect()
    }
}

/// Fit the weighted local-linear model by minimizing
/// `sum_i w_i |alpha + beta' s_i - theta_i|^2`.
///
/// The weights are the samples' importance weights (kernel indicator times
/// prior/sampler ratio), so draws outside the kernel or prior contribute
/// nothing.
pub fn fit_local_linear(
    samples: &[WeightedSample],
    s_obs: &[f64],
) -> Result<LinearAdjustmentModel, RegressionError> {
    let active: Vec<&WeightedSample> = samples.iter().filter(|s| s.weight > 0.0).collect();
    let dim_s = s_obs.len();
    if active.is_empty() {
        return Err(RegressionError::ZeroTotalWeight);
    }
    if active.iter().any(|s| s.summary.len() != dim_s) {
        return Err(RegressionError::MissingSummaries);
    }
    let dim_theta = active[0].theta.len();
    let n = active.len();
    if n <= dim_s + 1 {
        return Err(RegressionError::TooFewSamples {
            retained: n,
            dim: dim_s,
        });
    }

    // column scales: plain standard deviation of each centered summary over
    // the retained set
    let mut scale = vec![0.0; dim_s];
    {
        let mut mean = vec![0.0; dim_s];
        for s in &active {
            for (m, (&v, &o)) in mean.iter_mut().zip(s.summary.iter().zip(s_obs)) {
                *m += (v - o) / n as f64;
            }
        }
        for s in &active {
            for j in 0..dim_s {
                let c = s.summary[j] - s_obs[j] - mean[j];
                scale[j] += c * c / n as f64;
            }
        }
        for v in &mut scale {
            *v = v.sqrt();
        }
    }

    // columns with no variation are dropped up front
    let mut dropped: Vec<usize> = (0..dim_s).filter(|&j| scale[j] <= 1e-300).collect();
    let mut kept: Vec<usize> = (0..dim_s).filter(|j| !dropped.contains(j)).collect();

    // standardized design row for sample i: [1, (s_ij - s_obs_j) / scale_j]
    fn design_entry(
        s: &WeightedSample,
        col: usize,
        kept: &[usize],
        s_obs: &[f64],
        scale: &[f64],
    ) -> f64 {
        if col == 0 {
            1.0
        } else {
            let j = kept[col - 1];
            (s.summary[j] - s_obs[j]) / scale[j]
        }
    }

    // weighted Gram matrix and right-hand sides, rebuilt after each drop of
    // a collinear column (detected as a failed Cholesky pivot)
    let factor = loop {
        let p = kept.len() + 1;
        let mut gram = Matrix::zeros(p, p);
        for s in &active {
            for a in 0..p {
                let xa = design_entry(s, a, &kept, s_obs, &scale);
                for b in a..p {
                    gram[(a, b)] += s.weight * xa * design_entry(s, b, &kept, s_obs, &scale);
                }
            }
        }
        for a in 0..p {
            for b in a + 1..p {
                gram[(b, a)] = gram[(a, b)];
            }
        }
        match Cholesky::with_pivot_tol(&gram, 1e-10) {
            Ok(f) => break f,
            Err(crate::linalg::LinalgError::NotPositiveDefinite { col, .. }) => {
                if col == 0 || kept.is_empty() {
                    // intercept column cannot fail unless all weights vanish
                    return Err(RegressionError::ZeroTotalWeight);
                }
                dropped.push(kept.remove(col - 1));
            }
            Err(_) => return Err(RegressionError::ZeroTotalWeight),
        }
    };

    let p = kept.len() + 1;
    let mut alpha = vec![0.0; dim_theta];
    let mut beta = vec![vec![0.0; dim_s]; dim_theta];
    for k in 0..dim_theta {
        let mut rhs = vec![0.0; p];
        for s in &active {
            for (a, r) in rhs.iter_mut().enumerate() {
                *r += s.weight * design_entry(s, a, &kept, s_obs, &scale) * s.theta[k];
            }
        }
        let coef = factor.solve(&rhs);
        // un-standardize: m(s) = a~ + sum_j b~_j (s_j - o_j)/scale_j
        let mut a0 = coef[0];
        for (idx, &j) in kept.iter().enumerate() {
            let b = coef[idx + 1] / scale[j];
            beta[k][j] = b;
            a0 -= b * s_obs[j];
        }
        alpha[k] = a0;
    }
    dropped.sort_unstable();

    Ok(LinearAdjustmentModel {
        alpha,
        beta,
        dropped_columns: dropped,
    })
}

/// Shift draws to the observed summary: `theta* = m(s_obs) + theta - m(s)`.
/// Weights and summaries are carried through unchanged.
pub fn adjust(
    samples: &[WeightedSample],
    model: &LinearAdjustmentModel,
    s_obs: &[f64],
) -> Vec<WeightedSample> {
    let m_obs = model.predict(s_obs);
    samples
        .iter()
        .map(|s| {
            let m_s = model.predict(&s.summary);
            let theta = s
                .theta
                .iter()
                .zip(m_obs.iter().zip(&m_s))
                .map(|(&t, (&mo, &ms))| mo + (t - ms))
                .collect();
            WeightedSample {
                theta,
                weight: s.weight,
                summary: s.summary.clone(),
                distance: s.distance,
            }
        })
        .collect()
}
