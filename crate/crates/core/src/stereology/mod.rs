//! Forward simulators for stereological extremes: inclusions whose largest
//! diameters exceed a threshold follow a generalized Pareto law, their
//! centers a homogeneous Poisson process in the volume, and only inclusions
//! cut by a planar slice are observed, each through the largest diameter of
//! its planar section.
//!
//! Inclusions hit by the plane are a size-biased draw from the diameter law:
//! the chance of being cut is proportional to the extent of the inclusion
//! along the plane normal. Both simulators exploit that structure: the cut
//! count is Poisson with intensity `rate * area * E[V; V <= cap]`, cut
//! diameters follow the density `v f(v)` (sampled by inverting its exact
//! CDF), and the remaining geometry is conditionally uniform.

mod ellipsoid;
mod sphere;

pub use ellipsoid::{
    ellipsoid_observed_diameter, ellipsoid_plane_section, random_rotation, simulate_ellipsoidal,
    Rotation, SectionEllipse,
};
pub use sphere::{simulate_spherical, sphere_section_diameter};

use crate::evt::{gpd_cdf, gpd_quantile, GpdParams, XI_TOL};
use crate::rng::StreamRng;
use crate::stats::quantile_sorted;
use crate::summary::{SummaryScheme, SummaryVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StereoError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("expected inclusion count {expected:.3e} exceeds the simulation guard {guard:.3e}")]
    CountOverflow { expected: f64, guard: f64 },
    #[error("rotation matrix is not orthonormal (max deviation {0:.3e})")]
    InvalidRotation(f64),
}

/// Inclusion shape family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InclusionShape {
    Sphere,
    Ellipsoid,
}

/// Inclusion model parameters: Poisson rate per unit volume and the GPD
/// scale/shape of the largest diameter above the geometry's threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StereoParams {
    pub rate: f64,
    pub sigma: f64,
    pub xi: f64,
    pub shape: InclusionShape,
}

impl StereoParams {
    pub fn new(rate: f64, sigma: f64, xi: f64, shape: InclusionShape) -> Result<Self, StereoError> {
        if rate <= 0.0 || !rate.is_finite() {
            return Err(StereoError::InvalidParams(format!("rate {rate}")));
        }
        if sigma <= 0.0 || !sigma.is_finite() || !xi.is_finite() {
            return Err(StereoError::InvalidParams(format!(
                "gpd(sigma={sigma}, xi={xi})"
            )));
        }
        Ok(StereoParams {
            rate,
            sigma,
            xi,
            shape,
        })
    }

    pub fn gpd(&self, geom: &StereoGeometry) -> GpdParams {
        GpdParams {
            v0: geom.v0,
            sigma: self.sigma,
            xi: self.xi,
        }
    }

    pub fn as_vec(&self) -> Vec<f64> {
        vec![self.rate, self.sigma, self.xi]
    }
}

/// Sampling-plane geometry and thresholds.
///
/// `v0` is the diameter threshold above which the GPD applies; `u` is the
/// measurement threshold on observed section diameters. `max_expected`
/// guards the simulation against parameter draws whose expected cut count
/// dwarfs any plausible dataset (heavy-tailed shapes can imply millions of
/// cut inclusions); such draws fail and are retained by the engine with
/// infinite distance, which leaves the importance weights valid because
/// their summaries could never come close to the observation anyway.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StereoGeometry {
    pub lx: f64,
    pub ly: f64,
    pub u: f64,
    pub v0: f64,
    pub max_expected: f64,
}

impl StereoGeometry {
    pub fn new(lx: f64, ly: f64, u: f64, v0: f64) -> Result<Self, StereoError> {
        let finite = lx.is_finite() && ly.is_finite() && u.is_finite() && v0.is_finite();
        if !finite || lx <= 0.0 || ly <= 0.0 || u < 0.0 {
            return Err(StereoError::InvalidParams(format!(
                "geometry(lx={lx}, ly={ly}, u={u}, v0={v0})"
            )));
        }
        Ok(StereoGeometry {
            lx,
            ly,
            u,
            v0,
            max_expected: 2e3,
        })
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }
}

/// Observed planar-section diameters, all above the measurement threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StereoDataset {
    pub diameters: Vec<f64>,
}

impl StereoDataset {
    pub fn n(&self) -> usize {
        self.diameters.len()
    }
}

/// Seven-dimensional summary: six diameter quantiles and the observed count.
/// An empty dataset reduces to the reserved all-zero vector.
pub fn stereo_summary(d: &StereoDataset) -> SummaryVector {
    let values = if d.diameters.is_empty() {
        vec![0.0; 7]
    } else {
        let mut sorted = d.diameters.clone();
        sorted.sort_by(f64::total_cmp);
        vec![
            quantile_sorted(&sorted, 0.5),
            quantile_sorted(&sorted, 0.7),
            quantile_sorted(&sorted, 0.9),
            quantile_sorted(&sorted, 0.95),
            quantile_sorted(&sorted, 0.99),
            sorted[sorted.len() - 1],
            d.diameters.len() as f64,
        ]
    };
    SummaryVector::new(SummaryScheme::StereoQuantiles, values)
}

/// The GPD diameter law truncated at its `1 - 1e-8` quantile, together with
/// the exact CDF of the size-biased (cut-inclusion) diameter distribution.
///
/// All integrals are closed-form: with `T(w) = 1 + xi w / sigma` and
/// survival `S(w) = T^(-1/xi)`,
/// `I(w) = int_0^w S = sigma expm1(a ln T) / (a xi)` for `a = (xi-1)/xi`,
/// and `Phi(w) = int_0^w u f(u) du = I(w) - w S(w)`.
#[derive(Debug, Clone)]
pub struct SizeBiasedDiameter {
    gpd: GpdParams,
    /// Cap on the excess w = v - v0.
    pub w_cap: f64,
    /// E[V ; V <= cap] = v0 F(cap) + Phi(w_cap).
    pub mass: f64,
    phi_cap: f64,
    f_cap: f64,
}

const TAIL_TRUNCATION: f64 = 1e-8;

impl SizeBiasedDiameter {
    pub fn new(gpd: GpdParams) -> Self {
        let cap = gpd_quantile(1.0 - TAIL_TRUNCATION, &gpd);
        let w_cap = cap - gpd.v0;
        let f_cap = gpd_cdf(cap, &gpd);
        let phi_cap = phi(&gpd, w_cap);
        let mass = gpd.v0 * f_cap + phi_cap;
        SizeBiasedDiameter {
            gpd,
            w_cap,
            mass,
            phi_cap,
            f_cap,
        }
    }

    /// CDF of the size-biased diameter at `v`.
    pub fn cdf(&self, v: f64) -> f64 {
        if v <= self.gpd.v0 {
            return 0.0;
        }
        let w = (v - self.gpd.v0).min(self.w_cap);
        (self.gpd.v0 * gpd_cdf(v.min(self.gpd.v0 + self.w_cap), &self.gpd) + phi(&self.gpd, w))
            / self.mass
    }

    /// Fraction of the untruncated law kept by the cap (1 - 1e-8).
    pub fn kept_fraction(&self) -> f64 {
        self.f_cap
    }

    /// Draw one size-biased diameter by inverting the mixture CDF.
    ///
    /// With probability `v0 F(cap) / mass` the diameter is an ordinary
    /// truncated GPD draw (closed-form inverse); otherwise the excess solves
    /// `Phi(w) = t` by safeguarded Newton on the monotone closed form.
    pub fn sample(&self, rng: &mut StreamRng) -> f64 {
        use rand::Rng;
        let mix: f64 = rng.random::<f64>() * self.mass;
        if mix < self.gpd.v0 * self.f_cap {
            let u: f64 = crate::rng::open_unit(rng) * self.f_cap;
            return gpd_quantile(u, &self.gpd);
        }
        let t = crate::rng::open_unit(rng) * self.phi_cap;
        let mut lo = 0.0;
        let mut hi = self.w_cap;
        let mut w = 0.5 * self.w_cap;
        for _ in 0..200 {
            let val = phi(&self.gpd, w) - t;
            if val > 0.0 {
                hi = w;
            } else {
                lo = w;
            }
            let deriv = w * gpd_density_excess(&self.gpd, w);
            let newton = w - val / deriv;
            w = if deriv > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (hi - lo) <= 1e-13 * (1.0 + hi) {
                break;
            }
        }
        self.gpd.v0 + w
    }
}

/// GPD density of the excess w = v - v0.
fn gpd_density_excess(gpd: &GpdParams, w: f64) -> f64 {
    if w < 0.0 {
        return 0.0;
    }
    if gpd.xi.abs() < XI_TOL {
        (-w / gpd.sigma).exp() / gpd.sigma
    } else {
        let t = 1.0 + gpd.xi * w / gpd.sigma;
        if t <= 0.0 {
            0.0
        } else {
            t.powf(-1.0 / gpd.xi - 1.0) / gpd.sigma
        }
    }
}

/// `Phi(w) = int_0^w u f(u) du` where f is the GPD excess density.
fn phi(gpd: &GpdParams, w: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let s_w = if gpd.xi.abs() < XI_TOL {
        (-w / gpd.sigma).exp()
    } else {
        let t = 1.0 + gpd.xi * w / gpd.sigma;
        if t <= 0.0 {
            0.0
        } else {
            t.powf(-1.0 / gpd.xi)
        }
    };
    survival_integral(gpd, w) - w * s_w
}

/// `I(w) = int_0^w S(u) du` in closed form.
fn survival_integral(gpd: &GpdParams, w: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    if gpd.xi.abs() < XI_TOL {
        gpd.sigma * (-(-w / gpd.sigma).exp_m1())
    } else {
        let t = 1.0 + gpd.xi * w / gpd.sigma;
        let t = t.max(0.0);
        let a = (gpd.xi - 1.0) / gpd.xi;
        if a.abs() < 1e-12 {
            // xi == 1: the integrand is T^-1
            gpd.sigma * t.ln() / gpd.xi
        } else if t == 0.0 {
            // xi < 0 at the upper endpoint: I = sigma / (1 - xi)
            gpd.sigma / (1.0 - gpd.xi)
        } else {
            gpd.sigma * (a * t.ln()).exp_m1() / (a * gpd.xi)
        }
    }
}

/// Expected number of plane-cut inclusions (before the measurement
/// threshold is applied): `rate * area * E[V; V <= cap]`.
pub fn expected_cut_count(p: &StereoParams, geom: &StereoGeometry) -> f64 {
    p.rate * geom.area() * SizeBiasedDiameter::new(p.gpd(geom)).mass
}
