//! Tripletwise extremal coefficient estimation, geometric clustering of the
//! site triplets, and the cluster-mean summary vector.

use super::{MaxStableError, MaxStableField, SiteSet};
use crate::rng::{stream_rng, StreamRng};
use crate::summary::{SummaryScheme, SummaryVector};
use rand::seq::SliceRandom;

/// Estimator of the extremal coefficient of a site pair from `n` blocks of
/// unit-Fréchet maxima: `n / sum_i 1/max(z_i(a), z_i(b))`.
pub fn pair_extremal_estimate(za: &[f64], zb: &[f64]) -> f64 {
    assert_eq!(za.len(), zb.len());
    assert!(!za.is_empty());
    let denom: f64 = za
        .iter()
        .zip(zb)
        .map(|(&a, &b)| 1.0 / a.max(b))
        .sum();
    za.len() as f64 / denom
}

/// Tripletwise analog: `n / sum_i 1/max(z_i(j), z_i(k), z_i(l))`.
pub fn triplet_extremal_estimate(zj: &[f64], zk: &[f64], zl: &[f64]) -> f64 {
    assert_eq!(zj.len(), zk.len());
    assert_eq!(zj.len(), zl.len());
    assert!(!zj.is_empty());
    let denom: f64 = zj
        .iter()
        .zip(zk.iter().zip(zl))
        .map(|(&a, (&b, &c))| 1.0 / a.max(b).max(c))
        .sum();
    zj.len() as f64 / denom
}

/// Assignment of every site triplet to one of K clusters, built from the
/// triplet geometry alone so that observed and simulated fields on the same
/// sites share identical assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct TripletClustering {
    /// All C(D,3) site triplets in lexicographic order.
    pub triplets: Vec<[usize; 3]>,
    /// Cluster index of each triplet.
    pub assignment: Vec<usize>,
    pub k: usize,
}

fn all_triplets(d: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            for c in b + 1..d {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// Sorted pairwise-distance feature of one triplet.
fn triplet_feature(sites: &SiteSet, t: &[usize; 3]) -> [f64; 3] {
    let mut f = [
        sites.distance(t[0], t[1]),
        sites.distance(t[0], t[2]),
        sites.distance(t[1], t[2]),
    ];
    f.sort_by(f64::total_cmp);
    f
}

fn sq_dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

/// Group the site triplets into `k` clusters by k-means (Lloyd) on each
/// triplet's sorted pairwise-distance vector, with 20 seeded restarts.
/// Congruent triplets always co-cluster because their features coincide.
pub fn cluster_triplets(
    sites: &SiteSet,
    k: usize,
    seed: u64,
) -> Result<TripletClustering, MaxStableError> {
    let triplets = all_triplets(sites.len());
    if k == 0 || k > triplets.len() {
        return Err(MaxStableError::InvalidClusterCount {
            k,
            triplets: triplets.len(),
        });
    }
    let features: Vec<[f64; 3]> = triplets.iter().map(|t| triplet_feature(sites, t)).collect();

    let mut best: Option<(f64, Vec<usize>)> = None;
    for restart in 0..20 {
        let mut rng = stream_rng(seed, restart);
        let (inertia, assignment) = lloyd(&features, k, &mut rng);
        if best.as_ref().is_none_or(|(bi, _)| inertia < *bi) {
            best = Some((inertia, assignment));
        }
    }
    let (_, assignment) = best.expect("at least one restart");
    Ok(TripletClustering {
        triplets,
        assignment,
        k,
    })
}

fn lloyd(features: &[[f64; 3]], k: usize, rng: &mut StreamRng) -> (f64, Vec<usize>) {
    let n = features.len();
    // initial centers: k distinct feature indices
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut centers: Vec<[f64; 3]> = idx[..k].iter().map(|&i| features[i]).collect();
    let mut assignment = vec![0usize; n];

    for _ in 0..100 {
        // assign, ties to the lowest cluster index
        let mut changed = false;
        for (i, f) in features.iter().enumerate() {
            let mut best_c = 0;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let d = sq_dist(f, center);
                if d < best_d {
                    best_d = d;
                    best_c = c;
                }
            }
            if assignment[i] != best_c {
                assignment[i] = best_c;
                changed = true;
            }
        }
        // update
        let mut sums = vec![[0.0; 3]; k];
        let mut counts = vec![0usize; k];
        for (i, f) in features.iter().enumerate() {
            let c = assignment[i];
            for (s, v) in sums[c].iter_mut().zip(f) {
                *s += v;
            }
            counts[c] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                for s in sums[c].iter_mut() {
                    *s /= counts[c] as f64;
                }
                centers[c] = sums[c];
            } else {
                // re-seed an empty cluster at the point farthest from its
                // current center
                let far = (0..n)
                    .max_by(|&a, &b| {
                        sq_dist(&features[a], &centers[assignment[a]])
                            .total_cmp(&sq_dist(&features[b], &centers[assignment[b]]))
                    })
                    .unwrap();
                centers[c] = features[far];
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let inertia = features
        .iter()
        .enumerate()
        .map(|(i, f)| sq_dist(f, &centers[assignment[i]]))
        .sum();
    (inertia, assignment)
}

/// Cluster-mean summary: the triplet estimator over every triplet, averaged
/// within each cluster, ordered by cluster index. A cluster left empty by a
/// degenerate geometry contributes a reserved zero (identically for observed
/// and simulated data, which share the clustering).
pub fn maxstable_summary(field: &MaxStableField, clustering: &TripletClustering) -> SummaryVector {
    let n = field.n_blocks();
    let mut sums = vec![0.0; clustering.k];
    let mut counts = vec![0usize; clustering.k];
    let blocks = &field.blocks;
    for (t, cluster) in clustering.triplets.iter().zip(&clustering.assignment) {
        let mut denom = 0.0;
        for b in 0..n {
            let z = blocks[(b, t[0])]
                .max(blocks[(b, t[1])])
                .max(blocks[(b, t[2])]);
            denom += 1.0 / z;
        }
        sums[*cluster] += n as f64 / denom;
        counts[*cluster] += 1;
    }
    let values = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    SummaryVector::new(SummaryScheme::ExtremalClusters, values)
}
