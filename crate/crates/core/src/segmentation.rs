//! Multiple change points by binary segmentation.
//!
//! Each segment is tested with its own permutation threshold; a detected
//! split at `k` recurses on `[start, k]` and `[k+1, end]`. Branches stop when a
//! segment is shorter than `min_segment`, cannot be scanned, or shows no
//! change. Each segment's permutation seed is derived from its bounds, so the
//! result does not depend on traversal order.

use serde::Serialize;

use crate::bandwidth::{select_bandwidth, DEFAULT_CANDIDATES};
use crate::cusum::{CusumProfile, DetectionConfig};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, tag};
use crate::series::PairedSeries;
use crate::threshold::{detect_with_diagnostics, PermutationPolicy};

pub const DEFAULT_MIN_SEGMENT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentDecision {
    Change,
    NoChange,
    /// Shorter than the minimum segment length or the trimmed scan range.
    TooShort,
}

/// One tested (or too short to test) segment, in global 1-based coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct SegmentRecord {
    pub start: usize,
    pub end: usize,
    pub depth: usize,
    pub decision: SegmentDecision,
    pub k_hat: Option<usize>,
    pub max_stat: Option<f64>,
    pub threshold: Option<f64>,
    pub bandwidth: Option<f64>,
    #[serde(skip)]
    pub profile: Option<CusumProfile>,
}

impl SegmentRecord {
    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    pub fn is_leaf(&self) -> bool {
        self.decision != SegmentDecision::Change
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SegmentationResult {
    pub change_points: Vec<usize>,
    /// Every segment visited, in depth-first order.
    pub nodes: Vec<SegmentRecord>,
    pub tree_depth: usize,
}

impl SegmentationResult {
    /// Terminal segments in time order; they partition `[1, n]`.
    pub fn segments(&self) -> Vec<&SegmentRecord> {
        let mut leaves: Vec<&SegmentRecord> = self.nodes.iter().filter(|r| r.is_leaf()).collect();
        leaves.sort_by_key(|r| r.start);
        leaves
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SegmentationOptions {
    pub min_segment: usize,
    /// Re-select the bandwidth on every segment instead of inheriting it.
    pub rebandwidth: bool,
    pub bandwidth_candidates: usize,
}

impl SegmentationOptions {
    pub fn new(min_segment: usize) -> Self {
        Self {
            min_segment,
            rebandwidth: false,
            bandwidth_candidates: DEFAULT_CANDIDATES,
        }
    }
}

/// Permutation seed for the segment `[start, end]`.
pub fn segment_seed(seed: u64, start: usize, end: usize) -> u64 {
    derive_seed(seed, &[tag::SEGMENT, start as u64, end as u64])
}

pub fn binary_segmentation(
    series: &PairedSeries,
    config: &DetectionConfig,
    policy: &PermutationPolicy,
    min_segment: usize,
) -> Result<SegmentationResult> {
    binary_segmentation_with(series, config, policy, SegmentationOptions::new(min_segment))
}

pub fn binary_segmentation_with(
    series: &PairedSeries,
    config: &DetectionConfig,
    policy: &PermutationPolicy,
    options: SegmentationOptions,
) -> Result<SegmentationResult> {
    config.validate()?;
    policy.validate()?;
    let min_segment = options.min_segment;
    if min_segment < 2 || config.check_scan(min_segment).is_err() {
        return Err(Error::config(format!(
            "min_segment = {min_segment} leaves no scannable split at trim {}",
            config.trim_fraction
        )));
    }

    let mut nodes = Vec::new();
    let mut stack = vec![(1usize, series.len(), 0usize)];
    while let Some((start, end, depth)) = stack.pop() {
        let len = end + 1 - start;
        let too_short = SegmentRecord {
            start,
            end,
            depth,
            decision: SegmentDecision::TooShort,
            k_hat: None,
            max_stat: None,
            threshold: None,
            bandwidth: None,
            profile: None,
        };
        if len < min_segment || config.check_scan(len).is_err() {
            nodes.push(too_short);
            continue;
        }
        let sub = series.subseries(start, end)?;
        let mut cfg = config.clone();
        if options.rebandwidth {
            cfg.bandwidth = select_bandwidth(&sub, config, options.bandwidth_candidates)?.h_star;
        }
        let seg_policy = policy.with_seed(segment_seed(policy.rng_seed, start, end));
        let report = detect_with_diagnostics(&sub, &cfg, &seg_policy)?;
        let outcome = report.outcome;
        let k_global = outcome.k_hat.map(|k| start - 1 + k);
        nodes.push(SegmentRecord {
            decision: if outcome.change_detected {
                SegmentDecision::Change
            } else {
                SegmentDecision::NoChange
            },
            k_hat: k_global,
            max_stat: Some(outcome.max_stat),
            threshold: Some(outcome.threshold),
            bandwidth: Some(cfg.bandwidth),
            profile: Some(report.profile),
            ..too_short
        });
        if let Some(k) = k_global {
            // right pushed first so the left branch is visited first
            stack.push((k + 1, end, depth + 1));
            stack.push((start, k, depth + 1));
        }
    }

    let mut change_points: Vec<usize> = nodes.iter().filter_map(|r| r.k_hat).collect();
    change_points.sort_unstable();
    let tree_depth = nodes.iter().map(|r| r.depth).max().unwrap_or(0);
    Ok(SegmentationResult {
        change_points,
        nodes,
        tree_depth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_has_one_segment() {
        let x: Vec<f64> = (0..150).map(|t| ((t * 61) % 150) as f64 / 75.0 - 1.0).collect();
        let s = PairedSeries::new(x, vec![2.0; 150]).unwrap();
        let policy = PermutationPolicy { n_permutations: 20, ..Default::default() };
        let r = binary_segmentation(&s, &DetectionConfig::default(), &policy, 50).unwrap();
        assert!(r.change_points.is_empty());
        let segs = r.segments();
        assert_eq!(segs.len(), 1);
        assert_eq!((segs[0].start, segs[0].end), (1, 150));
        assert_eq!(segs[0].decision, SegmentDecision::NoChange);
        assert_eq!(r.tree_depth, 0);
    }

    #[test]
    fn rejects_unscannable_min_segment() {
        let s = PairedSeries::new((0..10).map(f64::from).collect(), vec![0.0; 10]).unwrap();
        let policy = PermutationPolicy::default();
        assert!(binary_segmentation(&s, &DetectionConfig::default(), &policy, 3).is_err());
    }

    #[test]
    fn short_series_is_a_single_too_short_leaf() {
        let s = PairedSeries::new((0..30).map(f64::from).collect(), vec![0.0; 30]).unwrap();
        let r = binary_segmentation(&s, &DetectionConfig::default(), &PermutationPolicy::default(), 50)
            .unwrap();
        assert_eq!(r.nodes.len(), 1);
        assert_eq!(r.nodes[0].decision, SegmentDecision::TooShort);
    }

    #[test]
    fn segment_seeds_depend_on_bounds() {
        assert_ne!(segment_seed(1, 1, 100), segment_seed(1, 1, 101));
        assert_ne!(segment_seed(1, 1, 100), segment_seed(2, 1, 100));
    }
}
