//! Spherical inclusion simulator.

use super::{SizeBiasedDiameter, StereoDataset, StereoError, StereoGeometry, StereoParams};
use crate::rng::StreamRng;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

/// Diameter of the circle cut from a sphere of diameter `v` by a plane at
/// signed center offset `z`; `None` when the plane misses the sphere.
pub fn sphere_section_diameter(v: f64, z: f64) -> Option<f64> {
    if z.abs() >= v / 2.0 {
        None
    } else {
        Some((v * v - 4.0 * z * z).sqrt())
    }
}

/// Simulate the observed section diameters of spherical inclusions cut by
/// the sampling plane.
///
/// The number of cut spheres is Poisson with mean `rate * area * E[V]`
/// (diameters capped at the 1 - 1e-8 quantile); each cut sphere's diameter
/// is a size-biased GPD draw and its center offset is uniform over the
/// cutting range, giving the section diameter `sqrt(V^2 - 4 z^2)`. Sections
/// at or below the measurement threshold go unobserved.
pub fn simulate_spherical(
    p: &StereoParams,
    geom: &StereoGeometry,
    rng: &mut StreamRng,
) -> Result<StereoDataset, StereoError> {
    let sb = SizeBiasedDiameter::new(p.gpd(geom));
    let mean_count = p.rate * geom.area() * sb.mass;
    if !mean_count.is_finite() || mean_count > geom.max_expected {
        return Err(StereoError::CountOverflow {
            expected: mean_count,
            guard: geom.max_expected,
        });
    }
    let count = Poisson::new(mean_count)
        .map_err(|e| StereoError::InvalidParams(format!("poisson mean {mean_count}: {e}")))?
        .sample(rng) as usize;

    let mut diameters = Vec::new();
    for _ in 0..count {
        let v = sb.sample(rng);
        let z = rng.random_range(-0.5 * v..0.5 * v);
        if let Some(y) = sphere_section_diameter(v, z) {
            if y > geom.u {
                diameters.push(y);
            }
        }
    }
    Ok(StereoDataset { diameters })
}
