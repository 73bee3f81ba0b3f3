//! GEV maximum likelihood via derivative-free simplex search.

use super::{gev_log_likelihood, l_moment_fit, EvtError, GevParams};

/// Result of a simplex minimization.
#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder-Mead simplex minimization with standard coefficients
/// (reflect 1, expand 2, contract 0.5, shrink 0.5).
///
/// Infeasible points may be signalled by returning `f64::INFINITY` from the
/// objective. Convergence is declared when the spread of objective values
/// over the simplex falls below `tol`.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    step: &[f64],
    tol: f64,
    max_iter: usize,
) -> NelderMeadResult {
    let dim = start.len();
    assert_eq!(step.len(), dim);

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(start.to_vec());
    for i in 0..dim {
        let mut v = start.to_vec();
        v[i] += step[i];
        simplex.push(v);
    }
    let mut fvals: Vec<f64> = simplex.iter().map(|x| f(x)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;

        // order low..high by objective
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| fvals[a].total_cmp(&fvals[b]));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        if (fvals[worst] - fvals[best]).abs() <= tol
            && fvals[best].is_finite()
            && fvals[worst].is_finite()
        {
            converged = true;
            break;
        }

        // centroid of all but the worst
        let mut centroid = vec![0.0; dim];
        for (i, v) in simplex.iter().enumerate() {
            if i != worst {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / dim as f64;
                }
            }
        }

        let point_at = |alpha: f64, centroid: &[f64], worst_v: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(worst_v)
                .map(|(&c, &w)| c + alpha * (c - w))
                .collect()
        };

        let reflected = point_at(1.0, &centroid, &simplex[worst]);
        let f_r = f(&reflected);

        if f_r < fvals[best] {
            let expanded = point_at(2.0, &centroid, &simplex[worst]);
            let f_e = f(&expanded);
            if f_e < f_r {
                simplex[worst] = expanded;
                fvals[worst] = f_e;
            } else {
                simplex[worst] = reflected;
                fvals[worst] = f_r;
            }
        } else if f_r < fvals[second_worst] {
            simplex[worst] = reflected;
            fvals[worst] = f_r;
        } else {
            let contracted = if f_r < fvals[worst] {
                point_at(0.5, &centroid, &simplex[worst])
            } else {
                point_at(-0.5, &centroid, &simplex[worst])
            };
            let f_c = f(&contracted);
            if f_c < fvals[worst].min(f_r) {
                simplex[worst] = contracted;
                fvals[worst] = f_c;
            } else {
                // shrink toward the best vertex
                let best_v = simplex[best].clone();
                for i in 0..=dim {
                    if i == best {
                        continue;
                    }
                    for (x, b) in simplex[i].iter_mut().zip(&best_v) {
                        *x = b + 0.5 * (*x - b);
                    }
                    fvals[i] = f(&simplex[i]);
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..=dim {
        if fvals[i] < fvals[best] {
            best = i;
        }
    }
    NelderMeadResult {
        x: simplex[best].clone(),
        f: fvals[best],
        iterations,
        converged,
    }
}

/// A fitted GEV with its log-likelihood and a convergence flag.
#[derive(Debug, Clone)]
pub struct GevFit {
    pub params: GevParams,
    pub log_likelihood: f64,
    pub converged: bool,
}

/// Maximize the GEV log-likelihood, started from the L-moment estimates.
///
/// Infeasible proposals (non-positive scale, observations outside the
/// support) are penalized with an infinite objective. If the simplex does
/// not converge within 500 iterations the best point found is returned with
/// `converged = false`; the returned log-likelihood never falls below the
/// start point's.
pub fn gev_mle_fit(y: &[f64]) -> Result<GevFit, EvtError> {
    if y.len() < 4 {
        return Err(EvtError::InvalidParams(format!(
            "mle fit needs n >= 4, got {}",
            y.len()
        )));
    }
    let start = l_moment_fit(y)?;
    let nll = |x: &[f64]| -> f64 {
        match GevParams::new(x[0], x[1], x[2]) {
            Ok(p) => -gev_log_likelihood(y, &p),
            Err(_) => f64::INFINITY,
        }
    };
    let steps = [0.25 * start.sigma, 0.25 * start.sigma, 0.1];
    let result = nelder_mead(nll, &start.as_vec(), &steps, 1e-8, 500);

    let start_ll = gev_log_likelihood(y, &start);
    let (params, ll) = if -result.f >= start_ll {
        (
            GevParams::new(result.x[0], result.x[1], result.x[2])?,
            -result.f,
        )
    } else {
        (start, start_ll)
    };
    Ok(GevFit {
        params,
        log_likelihood: ll,
        converged: result.converged,
    })
}
