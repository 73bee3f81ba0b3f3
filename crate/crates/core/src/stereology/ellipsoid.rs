//! Ellipsoidal inclusion simulator and the ellipsoid-plane section geometry.

use super::{SizeBiasedDiameter, StereoDataset, StereoError, StereoGeometry, StereoParams};
use crate::rng::StreamRng;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

/// A 3x3 rotation matrix, checked orthonormal on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(pub [[f64; 3]; 3]);

impl Rotation {
    pub fn identity() -> Self {
        Rotation([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn new(m: [[f64; 3]; 3]) -> Result<Self, StereoError> {
        let r = Rotation(m);
        let dev = r.orthonormality_deviation();
        if dev > 1e-10 {
            return Err(StereoError::InvalidRotation(dev));
        }
        Ok(r)
    }

    fn orthonormality_deviation(&self) -> f64 {
        let m = &self.0;
        let mut dev: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| m[k][i] * m[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((dot - target).abs());
            }
        }
        dev
    }

    /// Compose: self * other.
    pub fn compose(&self, other: &Rotation) -> Rotation {
        let a = &self.0;
        let b = &other.0;
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        Rotation(m)
    }

    /// Third row of the matrix, i.e. `R' e_z`.
    fn transpose_ez(&self) -> [f64; 3] {
        [self.0[2][0], self.0[2][1], self.0[2][2]]
    }
}

/// Uniform random rotation from a uniform unit quaternion.
pub fn random_rotation(rng: &mut StreamRng) -> Rotation {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    let u3: f64 = rng.random();
    let two_pi = 2.0 * std::f64::consts::PI;
    let (s1, c1) = (two_pi * u2).sin_cos();
    let (s2, c2) = (two_pi * u3).sin_cos();
    let a = (1.0 - u1).sqrt();
    let b = u1.sqrt();
    let (w, x, y, z) = (a * s1, a * c1, b * s2, b * c2);
    Rotation([
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ])
}

/// The ellipse cut from an ellipsoid by the horizontal plane `z = offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionEllipse {
    /// Ascending semi-axes of the section.
    pub semi_axes: [f64; 2],
}

impl SectionEllipse {
    pub fn largest_diameter(&self) -> f64 {
        2.0 * self.semi_axes[1]
    }
}

/// Intersect the ellipsoid with semi-axes `semi_axes` (in its own frame),
/// rotated by `rotation` and centered at the origin, with the plane
/// `z = plane_offset`.
///
/// Writes the quadratic form `M = R diag(a_i^-2) R'`, partitions it along
/// the plane normal as `[[Q, q], [q', m]]`, and uses the Schur complement:
/// the section exists iff `r = 1 - offset^2 (m - q' Q^-1 q) > 0`, with
/// section semi-axes `sqrt(r / eig(Q))`.
pub fn ellipsoid_plane_section(
    semi_axes: &[f64; 3],
    rotation: &Rotation,
    plane_offset: f64,
) -> Result<Option<SectionEllipse>, StereoError> {
    if semi_axes.iter().any(|&a| a.is_nan() || a <= 0.0) {
        return Err(StereoError::InvalidParams(format!(
            "semi axes {semi_axes:?}"
        )));
    }
    let dev = rotation.orthonormality_deviation();
    if dev > 1e-10 {
        return Err(StereoError::InvalidRotation(dev));
    }

    let r_m = &rotation.0;
    let inv_sq = [
        1.0 / (semi_axes[0] * semi_axes[0]),
        1.0 / (semi_axes[1] * semi_axes[1]),
        1.0 / (semi_axes[2] * semi_axes[2]),
    ];
    // M = R diag(inv_sq) R'
    let mut m = [[0.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|k| r_m[i][k] * inv_sq[k] * r_m[j][k]).sum();
        }
    }

    let (q11, q12, q22) = (m[0][0], m[0][1], m[1][1]);
    let q_vec = [m[0][2], m[1][2]];
    let m33 = m[2][2];

    let det_q = q11 * q22 - q12 * q12;
    // Q^-1 q
    let qi = [
        (q22 * q_vec[0] - q12 * q_vec[1]) / det_q,
        (-q12 * q_vec[0] + q11 * q_vec[1]) / det_q,
    ];
    let schur = m33 - (q_vec[0] * qi[0] + q_vec[1] * qi[1]);
    let r = 1.0 - plane_offset * plane_offset * schur;
    if r <= 0.0 {
        return Ok(None);
    }

    // eigenvalues of the symmetric 2x2 Q
    let half_tr = 0.5 * (q11 + q22);
    let disc = (0.25 * (q11 - q22) * (q11 - q22) + q12 * q12).sqrt();
    let eig_lo = half_tr - disc;
    let eig_hi = half_tr + disc;

    let ax_small = (r / eig_hi).sqrt();
    let ax_large = (r / eig_lo).sqrt();
    Ok(Some(SectionEllipse {
        semi_axes: [ax_small, ax_large],
    }))
}

/// Observed measurement of a cut ellipsoid: the largest principal diameter
/// of its planar section. The ellipsoid has principal diameters
/// `(u1 v3, u2 v3, v3)` in its own frame.
pub fn ellipsoid_observed_diameter(
    v3: f64,
    u1: f64,
    u2: f64,
    rotation: &Rotation,
    plane_offset: f64,
) -> Result<Option<f64>, StereoError> {
    let semi = [0.5 * u1 * v3, 0.5 * u2 * v3, 0.5 * v3];
    Ok(ellipsoid_plane_section(&semi, rotation, plane_offset)?
        .map(|s| s.largest_diameter()))
}

/// Half-extent of the rotated ellipsoid along the plane normal.
fn normal_half_extent(semi: &[f64; 3], rotation: &Rotation) -> f64 {
    let n = rotation.transpose_ez();
    ((semi[0] * n[0]).powi(2) + (semi[1] * n[1]).powi(2) + (semi[2] * n[2]).powi(2)).sqrt()
}

/// Simulate the observed section diameters of randomly oriented ellipsoidal
/// inclusions.
///
/// The largest principal diameter V3 is GPD above the threshold; the other
/// two are independent U(0,1) fractions of it; orientations are uniform.
/// Cut ellipsoids are produced exactly by thinning a candidate process:
/// candidates arrive at the spherical-envelope intensity
/// `rate * area * E[V3]` with V3 size-biased, and each is accepted with
/// probability `2 w / V3`, where `w` is the half-extent along the plane
/// normal (always at most V3 / 2). Accepted inclusions get a center offset
/// uniform over the cutting range and are measured through the largest
/// principal diameter of the planar section.
pub fn simulate_ellipsoidal(
    p: &StereoParams,
    geom: &StereoGeometry,
    rng: &mut StreamRng,
) -> Result<StereoDataset, StereoError> {
    let sb = SizeBiasedDiameter::new(p.gpd(geom));
    let mean_candidates = p.rate * geom.area() * sb.mass;
    if !mean_candidates.is_finite() || mean_candidates > geom.max_expected {
        return Err(StereoError::CountOverflow {
            expected: mean_candidates,
            guard: geom.max_expected,
        });
    }
    let count = Poisson::new(mean_candidates)
        .map_err(|e| StereoError::InvalidParams(format!("poisson mean {mean_candidates}: {e}")))?
        .sample(rng) as usize;

    let mut diameters = Vec::new();
    for _ in 0..count {
        let v3 = sb.sample(rng);
        let u1 = crate::rng::open_unit(rng);
        let u2 = crate::rng::open_unit(rng);
        let rot = random_rotation(rng);
        let semi = [0.5 * u1 * v3, 0.5 * u2 * v3, 0.5 * v3];
        let w = normal_half_extent(&semi, &rot);
        // thin the spherical envelope down to the true cut probability
        let accept: f64 = rng.random();
        if accept >= 2.0 * w / v3 {
            continue;
        }
        let z = rng.random_range(-w..w);
        if let Some(section) = ellipsoid_plane_section(&semi, &rot, z)? {
            let y = section.largest_diameter();
            if y > geom.u {
                diameters.push(y);
            }
        }
    }
    Ok(StereoDataset { diameters })
}
