//! Self-adaptive two-centroid clustering of measured probabilities.
//!
//! Centroids start at the largest and smallest probability and move to their
//! cluster means until they stop changing. The cluster whose centroid ends
//! higher is the set of likely targets.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::statevector::ProbabilityMap;

pub const DEFAULT_MAX_PASSES: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterState {
    pub high_centroid: f64,
    pub low_centroid: f64,
    /// Entries nearer the high centroid, in input order.
    pub high: Vec<(usize, f64)>,
    /// Everything else, ties included.
    pub low: Vec<(usize, f64)>,
    pub passes: usize,
    pub converged: bool,
}

impl ClusterState {
    /// The cluster with the larger centroid; the low cluster on a tie.
    pub fn selected(&self) -> &[(usize, f64)] {
        if self.high_centroid > self.low_centroid {
            &self.high
        } else {
            &self.low
        }
    }
}

fn mean_or(cluster: &[(usize, f64)], fallback: f64) -> f64 {
    if cluster.is_empty() {
        fallback
    } else {
        cluster.iter().map(|(_, p)| p).sum::<f64>() / cluster.len() as f64
    }
}

/// Runs the two-centroid clustering to convergence or `max_passes`.
pub fn cluster(probs: &ProbabilityMap, max_passes: usize) -> Result<ClusterState> {
    if probs.is_empty() {
        return Err(Error::invalid("cannot filter an empty probability map"));
    }
    if max_passes == 0 {
        return Err(Error::invalid("max_passes must be at least 1"));
    }
    let (mut ce1, mut ce2) = probs
        .iter()
        .fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), (_, p)| (hi.max(p), lo.min(p)));

    let mut passes = 0;
    loop {
        let (c1, c2): (Vec<_>, Vec<_>) = probs
            .iter()
            .partition(|&(_, p)| (p - ce1).abs() < (p - ce2).abs());
        let nce1 = mean_or(&c1, ce1);
        let nce2 = mean_or(&c2, ce2);
        passes += 1;
        let converged = nce1 == ce1 && nce2 == ce2;
        ce1 = nce1;
        ce2 = nce2;
        if converged || passes >= max_passes {
            return Ok(ClusterState {
                high_centroid: ce1,
                low_centroid: ce2,
                high: c1,
                low: c2,
                passes,
                converged,
            });
        }
    }
}

/// Basis labels of the likely-target cluster.
pub fn filter(probs: &ProbabilityMap, max_passes: usize) -> Result<BTreeSet<usize>> {
    Ok(cluster(probs, max_passes)?
        .selected()
        .iter()
        .map(|&(k, _)| k)
        .collect())
}
