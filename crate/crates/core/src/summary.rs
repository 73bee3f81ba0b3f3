//! Summary statistic vectors and their scheme tags.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The data-reduction scheme a summary vector was computed under.
///
/// The tag travels with the vector so that observed and simulated summaries
/// can only be compared when they were produced by the same reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SummaryScheme {
    /// The dataset itself, untouched (dimension n).
    Raw,
    /// Ascending order statistics (dimension n).
    OrderStats,
    /// The three L-moment parameter estimates of a GEV fit.
    LMoments,
    /// The three maximum-likelihood parameter estimates of a GEV fit.
    Mle,
    /// Six diameter quantiles plus the observed count (dimension 7).
    StereoQuantiles,
    /// Cluster means of tripletwise extremal coefficient estimates
    /// (dimension = number of clusters).
    ExtremalClusters,
}

impl SummaryScheme {
    pub fn tag(&self) -> &'static str {
        match self {
            SummaryScheme::Raw => "raw",
            SummaryScheme::OrderStats => "order-stats",
            SummaryScheme::LMoments => "l-moments",
            SummaryScheme::Mle => "mle",
            SummaryScheme::StereoQuantiles => "stereo-quantiles",
            SummaryScheme::ExtremalClusters => "extremal-clusters",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Some(match tag {
            "raw" => SummaryScheme::Raw,
            "order-stats" => SummaryScheme::OrderStats,
            "l-moments" => SummaryScheme::LMoments,
            "mle" => SummaryScheme::Mle,
            "stereo-quantiles" => SummaryScheme::StereoQuantiles,
            "extremal-clusters" => SummaryScheme::ExtremalClusters,
            _ => return None,
        })
    }

    /// The dimension this scheme must produce, given the relevant size
    /// (`n` for data-length schemes, `k` for cluster schemes).
    pub fn expected_dim(&self, size: usize) -> usize {
        match self {
            SummaryScheme::Raw | SummaryScheme::OrderStats => size,
            SummaryScheme::LMoments | SummaryScheme::Mle => 3,
            SummaryScheme::StereoQuantiles => 7,
            SummaryScheme::ExtremalClusters => size,
        }
    }
}

#[derive(Debug, Error)]
pub enum SummaryError {
    #[error("summary dimension {got} does not match scheme {scheme} (expected {expected})")]
    DimensionMismatch {
        scheme: &'static str,
        got: usize,
        expected: usize,
    },
}

/// A fixed-length real vector with its scheme tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryVector {
    pub scheme: SummaryScheme,
    pub values: Vec<f64>,
}

impl SummaryVector {
    pub fn new(scheme: SummaryScheme, values: Vec<f64>) -> Self {
        SummaryVector { scheme, values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip() {
        for s in [
            SummaryScheme::Raw,
            SummaryScheme::OrderStats,
            SummaryScheme::LMoments,
            SummaryScheme::Mle,
            SummaryScheme::StereoQuantiles,
            SummaryScheme::ExtremalClusters,
        ] {
            assert_eq!(SummaryScheme::from_tag(s.tag()), Some(s));
        }
        assert_eq!(SummaryScheme::from_tag("bogus"), None);
    }

    #[test]
    fn expected_dims() {
        assert_eq!(SummaryScheme::Raw.expected_dim(49), 49);
        assert_eq!(SummaryScheme::LMoments.expected_dim(49), 3);
        assert_eq!(SummaryScheme::Mle.expected_dim(49), 3);
        assert_eq!(SummaryScheme::StereoQuantiles.expected_dim(0), 7);
        assert_eq!(SummaryScheme::ExtremalClusters.expected_dim(20), 20);
    }
}
