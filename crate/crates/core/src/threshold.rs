//! Permutation thresholds and the change / no-change decision.
//!
//! The threshold is the nearest-rank quantile of `max_t W(t)` over random
//! joint permutations of the `(X_t, Y_t)` pairs. Permuting destroys the time
//! location of any change while keeping the joint marginal of the pairs.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::cusum::{argmax_change_point, profile_on_grid, CusumProfile, DetectionConfig, GridSpec};
use crate::error::{Error, Result};
use crate::rng::{self, tag};
use crate::series::PairedSeries;

pub const DEFAULT_PERMUTATIONS: usize = 200;
pub const DEFAULT_LEVEL: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermutationPolicy {
    pub n_permutations: usize,
    pub quantile_level: f64,
    pub rng_seed: u64,
}

impl Default for PermutationPolicy {
    fn default() -> Self {
        Self {
            n_permutations: DEFAULT_PERMUTATIONS,
            quantile_level: DEFAULT_LEVEL,
            rng_seed: 0,
        }
    }
}

impl PermutationPolicy {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_permutations == 0 {
            return Err(Error::config("need at least one permutation"));
        }
        if !(self.quantile_level > 0.0 && self.quantile_level < 1.0) {
            return Err(Error::config(format!(
                "quantile level must lie in (0, 1), got {}",
                self.quantile_level
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionOutcome {
    pub change_detected: bool,
    pub k_hat: Option<usize>,
    pub max_stat: f64,
    pub threshold: f64,
    pub n: usize,
}

/// Outcome together with the intermediate profile and permutation maxima.
#[derive(Debug, Clone)]
pub struct DetectionReport {
    pub outcome: DetectionOutcome,
    pub profile: CusumProfile,
    /// Argmax of the profile regardless of the decision.
    pub argmax: usize,
    /// Permutation maxima in draw order.
    pub permutation_maxima: Vec<f64>,
}

/// Order in which permutation `replicate` visits the `n` pairs.
pub fn permutation_order(n: usize, seed: u64, replicate: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng::stream(seed, &[tag::PERMUTATION, replicate as u64]);
    order.shuffle(&mut rng);
    order
}

/// `max_t W(t)` for each permuted copy of `series`, in replicate order.
///
/// The grid is resolved once on the original series; permutations leave the
/// regressor multiset unchanged, so a percentile grid would come out the same.
pub fn permutation_maxima(
    series: &PairedSeries,
    config: &DetectionConfig,
    policy: &PermutationPolicy,
) -> Result<Vec<f64>> {
    config.validate()?;
    policy.validate()?;
    config.check_scan(series.len())?;
    let grid = config.grid.resolve(series)?;
    (0..policy.n_permutations)
        .into_par_iter()
        .map(|r| {
            let order = permutation_order(series.len(), policy.rng_seed, r);
            let permuted = series.reindexed(&order);
            Ok(profile_on_grid(&permuted, &grid, config)?.max_stat())
        })
        .collect()
}

/// Nearest-rank empirical quantile: the `⌈level·N⌉`-th smallest value.
pub fn nearest_rank_quantile(values: &[f64], level: f64) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    // guard against level*n landing a hair above an integer
    let rank = ((level * n as f64) - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    sorted[rank - 1]
}

pub fn permutation_threshold(
    series: &PairedSeries,
    config: &DetectionConfig,
    policy: &PermutationPolicy,
) -> Result<f64> {
    let maxima = permutation_maxima(series, config, policy)?;
    Ok(nearest_rank_quantile(&maxima, policy.quantile_level))
}

/// Profile, threshold and decision in one pass.
pub fn detect_with_diagnostics(
    series: &PairedSeries,
    config: &DetectionConfig,
    policy: &PermutationPolicy,
) -> Result<DetectionReport> {
    config.validate()?;
    policy.validate()?;
    config.check_scan(series.len())?;
    let grid = config.grid.resolve(series)?;
    let fixed = config.clone().with_grid(GridSpec::Explicit(grid.clone()));
    let profile = profile_on_grid(series, &grid, config)?;
    let est = argmax_change_point(&profile);
    let permutation_maxima = permutation_maxima(series, &fixed, policy)?;
    let threshold = nearest_rank_quantile(&permutation_maxima, policy.quantile_level);
    let change_detected = est.max_stat > threshold;
    Ok(DetectionReport {
        outcome: DetectionOutcome {
            change_detected,
            k_hat: change_detected.then_some(est.k_hat),
            max_stat: est.max_stat,
            threshold,
            n: series.len(),
        },
        profile,
        argmax: est.k_hat,
        permutation_maxima,
    })
}

/// Declares a change when `max_t W(t)` strictly exceeds the permutation
/// threshold; ties mean no change.
pub fn detect(
    series: &PairedSeries,
    config: &DetectionConfig,
    policy: &PermutationPolicy,
) -> Result<DetectionOutcome> {
    detect_with_diagnostics(series, config, policy).map(|r| r.outcome)
}
