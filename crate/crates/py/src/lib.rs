//! Python bindings for the ABC extremes toolkit.
//!
//! Exposes the parameter types, the forward simulators, and a high-level
//! GEV ABC runner so that small analyses and sanity checks can be driven
//! from Python without the CLI.
//!
//! Build with `cargo build -p abc-extremes-py --release` and import the
//! produced shared library as `abc_extremes` (see python/smoke_test.py).

use abc_extremes_core::abc::{
    pilot_covariance, run_abc, weighted_mean, weighted_quantile, AbcConfig, DistanceMetric,
    ParamBox,
};
use abc_extremes_core::evt;
use abc_extremes_core::evt::{GevParams, GpdParams};
use abc_extremes_core::maxstable;
use abc_extremes_core::maxstable::{MaternParams, SiteSet};
use abc_extremes_core::regression;
use abc_extremes_core::rng::{phase_seed, stream_rng, StreamRng};
use abc_extremes_core::stereology;
use abc_extremes_core::stereology::{InclusionShape, StereoGeometry, StereoParams};
use abc_extremes_core::summary::{SummaryScheme, SummaryVector};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// GEV parameters (location, scale, shape).
#[pyclass(name = "GevParams", from_py_object)]
#[derive(Clone)]
struct PyGevParams {
    inner: GevParams,
}

#[pymethods]
impl PyGevParams {
    #[new]
    fn new(mu: f64, sigma: f64, xi: f64) -> PyResult<Self> {
        Ok(PyGevParams {
            inner: GevParams::new(mu, sigma, xi).map_err(err)?,
        })
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.inner.sigma
    }

    #[getter]
    fn xi(&self) -> f64 {
        self.inner.xi
    }

    fn cdf(&self, z: f64) -> f64 {
        evt::gev_cdf(z, &self.inner)
    }

    fn quantile(&self, p: f64) -> PyResult<f64> {
        if !(0.0 < p && p < 1.0) {
            return Err(PyValueError::new_err("p must be in (0, 1)"));
        }
        Ok(evt::gev_quantile(p, &self.inner))
    }

    fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        evt::gev_sample(&self.inner, n, &mut stream_rng(seed, 0))
    }

    fn log_likelihood(&self, y: Vec<f64>) -> f64 {
        evt::gev_log_likelihood(&y, &self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "GevParams(mu={}, sigma={}, xi={})",
            self.inner.mu, self.inner.sigma, self.inner.xi
        )
    }
}

/// GPD parameters (threshold, scale, shape).
#[pyclass(name = "GpdParams", from_py_object)]
#[derive(Clone)]
struct PyGpdParams {
    inner: GpdParams,
}

#[pymethods]
impl PyGpdParams {
    #[new]
    fn new(v0: f64, sigma: f64, xi: f64) -> PyResult<Self> {
        Ok(PyGpdParams {
            inner: GpdParams::new(v0, sigma, xi).map_err(err)?,
        })
    }

    fn cdf(&self, v: f64) -> f64 {
        evt::gpd_cdf(v, &self.inner)
    }

    fn quantile(&self, p: f64) -> PyResult<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(PyValueError::new_err("p must be in [0, 1)"));
        }
        Ok(evt::gpd_quantile(p, &self.inner))
    }

    fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        evt::gpd_sample(&self.inner, n, &mut stream_rng(seed, 0))
    }

    fn __repr__(&self) -> String {
        format!(
            "GpdParams(v0={}, sigma={}, xi={})",
            self.inner.v0, self.inner.sigma, self.inner.xi
        )
    }
}

/// Whittle-Matérn dependence parameters (nugget, range, smoothness).
#[pyclass(name = "MaternParams", from_py_object)]
#[derive(Clone)]
struct PyMaternParams {
    inner: MaternParams,
}

#[pymethods]
impl PyMaternParams {
    #[new]
    fn new(c1: f64, c2: f64, nu: f64) -> PyResult<Self> {
        Ok(PyMaternParams {
            inner: MaternParams::new(c1, c2, nu).map_err(err)?,
        })
    }

    fn correlation(&self, h: f64) -> PyResult<f64> {
        maxstable::matern_correlation(h, &self.inner).map_err(err)
    }

    fn extremal_coefficient(&self, h: f64) -> PyResult<f64> {
        maxstable::pairwise_extremal_coef(h, &self.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "MaternParams(c1={}, c2={}, nu={})",
            self.inner.c1, self.inner.c2, self.inner.nu
        )
    }
}

/// Fit a GEV by the method of L-moments; returns GevParams.
#[pyfunction]
fn l_moment_fit(y: Vec<f64>) -> PyResult<PyGevParams> {
    Ok(PyGevParams {
        inner: evt::l_moment_fit(&y).map_err(err)?,
    })
}

/// Fit a GEV by maximum likelihood; returns (GevParams, log_likelihood,
/// converged).
#[pyfunction]
fn gev_mle_fit(y: Vec<f64>) -> PyResult<(PyGevParams, f64, bool)> {
    let fit = evt::gev_mle_fit(&y).map_err(err)?;
    Ok((
        PyGevParams { inner: fit.params },
        fit.log_likelihood,
        fit.converged,
    ))
}

/// Transform GEV observations to unit-Fréchet margins.
#[pyfunction]
fn to_unit_frechet(z: Vec<f64>, params: PyGevParams) -> PyResult<Vec<f64>> {
    evt::to_unit_frechet(&z, &params.inner).map_err(err)
}

/// Modified Bessel function of the second kind.
#[pyfunction]
fn bessel_k(nu: f64, x: f64) -> PyResult<f64> {
    maxstable::bessel_k(nu, x).map_err(err)
}

/// Closed-form bivariate CDF of the extremal Gaussian process.
#[pyfunction]
fn schlather_bivariate_cdf(z1: f64, z2: f64, rho: f64) -> PyResult<f64> {
    maxstable::schlather_bivariate_cdf(z1, z2, rho).map_err(err)
}

/// Simulate a max-stable field: one row per block, one column per site.
#[pyfunction]
fn schlather_simulate(
    coords: Vec<(f64, f64)>,
    params: PyMaternParams,
    n_blocks: usize,
    seed: u64,
) -> PyResult<Vec<Vec<f64>>> {
    let sites = SiteSet::new(coords).map_err(err)?;
    let field = maxstable::schlather_simulate(&sites, &params.inner, n_blocks, &mut stream_rng(seed, 0))
        .map_err(err)?;
    Ok((0..field.n_blocks())
        .map(|b| (0..field.n_sites()).map(|j| field.blocks[(b, j)]).collect())
        .collect())
}

/// Tripletwise extremal coefficient estimator from unit-Fréchet maxima.
#[pyfunction]
fn triplet_extremal_estimate(zj: Vec<f64>, zk: Vec<f64>, zl: Vec<f64>) -> PyResult<f64> {
    if zj.len() != zk.len() || zj.len() != zl.len() || zj.is_empty() {
        return Err(PyValueError::new_err("columns must share a positive length"));
    }
    Ok(maxstable::triplet_extremal_estimate(&zj, &zk, &zl))
}

/// Simulate observed inclusion section diameters (spherical or ellipsoidal).
#[pyfunction]
#[pyo3(signature = (rate, sigma, xi, shape="sphere", lx=1.0, ly=1.0096, u=5.0, v0=5.0, seed=0))]
#[allow(clippy::too_many_arguments)]
fn simulate_inclusions(
    rate: f64,
    sigma: f64,
    xi: f64,
    shape: &str,
    lx: f64,
    ly: f64,
    u: f64,
    v0: f64,
    seed: u64,
) -> PyResult<Vec<f64>> {
    let shape = match shape {
        "sphere" => InclusionShape::Sphere,
        "ellipsoid" => InclusionShape::Ellipsoid,
        other => return Err(PyValueError::new_err(format!("unknown shape {other:?}"))),
    };
    let p = StereoParams::new(rate, sigma, xi, shape).map_err(err)?;
    let geom = StereoGeometry::new(lx, ly, u, v0).map_err(err)?;
    let mut rng = stream_rng(seed, 0);
    let data = match shape {
        InclusionShape::Sphere => stereology::simulate_spherical(&p, &geom, &mut rng),
        InclusionShape::Ellipsoid => stereology::simulate_ellipsoidal(&p, &geom, &mut rng),
    }
    .map_err(err)?;
    Ok(data.diameters)
}

/// Quantile-plus-count summary of an inclusion dataset.
#[pyfunction]
fn stereo_summary(diameters: Vec<f64>) -> Vec<f64> {
    stereology::stereo_summary(&stereology::StereoDataset { diameters }).values
}

/// ABC importance sampling for the GEV model with a synthetic-data
/// simulator, Mahalanobis distance from a pilot covariance at the MLE, and
/// optional local-linear adjustment.
///
/// Returns a dict with thetas, weights, distances, the realized kernel
/// scale, and posterior means.
#[pyfunction]
#[pyo3(signature = (y_obs, n_samples=10000, h_quantile=0.05, scheme="mle", seed=0, adjust=true,
                    box_lo=(30.0, 5.0, -0.3), box_hi=(70.0, 45.0, 1.5)))]
#[allow(clippy::too_many_arguments)]
fn abc_gev(
    py: Python<'_>,
    y_obs: Vec<f64>,
    n_samples: usize,
    h_quantile: f64,
    scheme: &str,
    seed: u64,
    adjust: bool,
    box_lo: (f64, f64, f64),
    box_hi: (f64, f64, f64),
) -> PyResult<Py<pyo3::types::PyDict>> {
    let scheme = SummaryScheme::from_tag(scheme)
        .filter(|s| {
            matches!(
                s,
                SummaryScheme::Raw
                    | SummaryScheme::OrderStats
                    | SummaryScheme::LMoments
                    | SummaryScheme::Mle
            )
        })
        .ok_or_else(|| PyValueError::new_err("scheme must be raw, order-stats, l-moments or mle"))?;
    let n_obs = y_obs.len();
    if n_obs < 4 {
        return Err(PyValueError::new_err("need at least 4 observations"));
    }

    let simulate = move |theta: &[f64], rng: &mut StreamRng| -> Result<Vec<f64>, String> {
        let p = GevParams::new(theta[0], theta[1], theta[2]).map_err(|e| e.to_string())?;
        Ok(evt::gev_sample(&p, n_obs, rng))
    };
    let summarize = move |y: &Vec<f64>| evt::gev_summary(y, scheme).expect("summary");

    let s_obs = evt::gev_summary(&y_obs, scheme).map_err(err)?;
    let mle = evt::gev_mle_fit(&y_obs).map_err(err)?.params;
    let pilot = pilot_covariance(simulate, summarize, &mle.as_vec(), 1000, phase_seed(seed, 2))
        .map_err(err)?;
    let metric = DistanceMetric::mahalanobis(&pilot.matrix).map_err(err)?;

    let bounds = ParamBox::new(
        vec![box_lo.0, box_lo.1, box_lo.2],
        vec![box_hi.0, box_hi.1, box_hi.2],
    )
    .map_err(err)?;
    let cfg = AbcConfig {
        n_samples,
        h_quantile,
        sampler: bounds.clone(),
        prior: Some(bounds),
        seed: phase_seed(seed, 3),
    };
    let run = run_abc(simulate, summarize, &s_obs, &metric, &cfg).map_err(err)?;

    let samples = if adjust {
        let model =
            regression::fit_local_linear(&run.samples, &s_obs.values).map_err(err)?;
        regression::adjust(&run.samples, &model, &s_obs.values)
    } else {
        run.samples.clone()
    };

    let thetas: Vec<Vec<f64>> = samples.iter().map(|s| s.theta.clone()).collect();
    let weights: Vec<f64> = samples.iter().map(|s| s.weight).collect();
    let distances: Vec<f64> = samples.iter().map(|s| s.distance).collect();
    let means: Vec<f64> = (0..3)
        .map(|c| weighted_mean(&samples, c).map_err(err))
        .collect::<PyResult<_>>()?;
    let medians: Vec<f64> = (0..3)
        .map(|c| weighted_quantile(&samples, c, 0.5).map_err(err))
        .collect::<PyResult<_>>()?;

    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("theta", thetas)?;
    dict.set_item("weight", weights)?;
    dict.set_item("distance", distances)?;
    dict.set_item("h", run.h)?;
    dict.set_item("n_total", run.n_total)?;
    dict.set_item("retained", samples.len())?;
    dict.set_item("mean", means)?;
    dict.set_item("median", medians)?;
    dict.set_item("adjusted", adjust)?;
    Ok(dict.into())
}

/// Observed summary under a named scheme, as plain values.
#[pyfunction]
fn gev_summary(y: Vec<f64>, scheme: &str) -> PyResult<Vec<f64>> {
    let scheme = SummaryScheme::from_tag(scheme)
        .ok_or_else(|| PyValueError::new_err(format!("unknown scheme {scheme:?}")))?;
    let s: SummaryVector = evt::gev_summary(&y, scheme).map_err(err)?;
    Ok(s.values)
}

#[pymodule]
fn abc_extremes(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyGevParams>()?;
    m.add_class::<PyGpdParams>()?;
    m.add_class::<PyMaternParams>()?;
    m.add_function(wrap_pyfunction!(l_moment_fit, m)?)?;
    m.add_function(wrap_pyfunction!(gev_mle_fit, m)?)?;
    m.add_function(wrap_pyfunction!(gev_summary, m)?)?;
    m.add_function(wrap_pyfunction!(to_unit_frechet, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_k, m)?)?;
    m.add_function(wrap_pyfunction!(schlather_bivariate_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(schlather_simulate, m)?)?;
    m.add_function(wrap_pyfunction!(triplet_extremal_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_inclusions, m)?)?;
    m.add_function(wrap_pyfunction!(stereo_summary, m)?)?;
    m.add_function(wrap_pyfunction!(abc_gev, m)?)?;
    Ok(())
}
