//! Monte Carlo driver for the simulation tables.
//!
//! Two protocols are kept apart: the bias study takes the unconditional argmax
//! of every replication, while the PDC study runs the full permutation-
//! threshold detector. Replication `i` draws all of its randomness from seeds
//! derived from `(master_seed, i)`, so reports do not depend on scheduling.

use rayon::prelude::*;
use serde::Serialize;

use crate::cusum::{argmax_change_point, cusum_profile, DetectionConfig, Method};
use crate::dgp::{simulate_pair, ChangeModelSpec, DgpFamily, Process};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, tag};
use crate::series::PairedSeries;
use crate::threshold::{detect, PermutationPolicy};

pub const DEFAULT_REPLICATIONS: usize = 200;
pub const DEFAULT_OMEGA: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub regressor: Process,
    pub noise: Process,
    pub model: ChangeModelSpec,
    pub n: usize,
    pub method: Method,
    /// Estimator and aggregation are taken from `method`.
    pub detection: DetectionConfig,
    /// Required by the PDC study, ignored by the bias study. Its `rng_seed`
    /// is replaced by a per-replication seed.
    pub policy: Option<PermutationPolicy>,
    pub replications: usize,
    pub master_seed: u64,
}

impl ExperimentSpec {
    /// Cell of the simulation study with default detection settings.
    pub fn cell(family: DgpFamily, model: ChangeModelSpec, n: usize, method: Method) -> Self {
        Self {
            regressor: family.regressor(),
            noise: family.noise(),
            model,
            n,
            method,
            detection: DetectionConfig::default(),
            policy: None,
            replications: DEFAULT_REPLICATIONS,
            master_seed: 0,
        }
    }

    pub fn with_policy(mut self, policy: PermutationPolicy) -> Self {
        self.policy = Some(policy);
        self
    }

    pub fn with_replications(mut self, replications: usize) -> Self {
        self.replications = replications;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn detection_config(&self) -> DetectionConfig {
        self.detection.clone().with_method(self.method)
    }

    /// True change index `k = ⌊θn⌋`.
    pub fn change_index(&self) -> usize {
        self.model.change_index(self.n)
    }

    fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::config("need at least one replication"));
        }
        self.regressor.validate()?;
        self.noise.validate()?;
        self.model.validate(self.n)?;
        let cfg = self.detection_config();
        cfg.validate()?;
        cfg.check_scan(self.n)?;
        Ok(())
    }

    pub fn replication_seed(&self, index: usize) -> u64 {
        derive_seed(self.master_seed, &[tag::REPLICATION, index as u64])
    }

    pub fn sample(&self, index: usize) -> Result<PairedSeries> {
        simulate_pair(self.regressor, self.noise, &self.model, self.n, self.replication_seed(index))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub method: Method,
    pub n: usize,
    /// True change index.
    pub k: usize,
    pub replications: usize,
    /// Replications contributing a change-point estimate.
    pub n_estimates: usize,
    pub bias: Option<f64>,
    pub bias_sd: Option<f64>,
    pub abias: Option<f64>,
    pub abias_sd: Option<f64>,
    /// Fraction of replications declaring a change (1 in the bias study).
    pub pdc: f64,
    pub per_replication_khat: Vec<Option<usize>>,
    pub per_replication_max_stat: Vec<f64>,
    pub per_replication_threshold: Vec<Option<f64>>,
}

impl ExperimentReport {
    /// `k̂ - k` for every replication with an estimate.
    pub fn deviations(&self) -> Vec<i64> {
        self.per_replication_khat
            .iter()
            .flatten()
            .map(|&kh| kh as i64 - self.k as i64)
            .collect()
    }
}

/// Mean and sample sd (N-1 divisor). The sd of a single value is reported as 0.
fn mean_sd(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some((mean, sd))
}

struct Replicate {
    k_hat: Option<usize>,
    max_stat: f64,
    threshold: Option<f64>,
}

fn summarize(spec: &ExperimentSpec, reps: Vec<Replicate>) -> ExperimentReport {
    let k = spec.change_index();
    let diffs: Vec<f64> = reps
        .iter()
        .filter_map(|r| r.k_hat)
        .map(|kh| kh as f64 - k as f64)
        .collect();
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let signed = mean_sd(&diffs);
    let absolute = mean_sd(&abs);
    let detected = reps.iter().filter(|r| r.k_hat.is_some()).count();
    ExperimentReport {
        method: spec.method,
        n: spec.n,
        k,
        replications: reps.len(),
        n_estimates: diffs.len(),
        bias: signed.map(|p| p.0),
        bias_sd: signed.map(|p| p.1),
        abias: absolute.map(|p| p.0),
        abias_sd: absolute.map(|p| p.1),
        pdc: detected as f64 / reps.len() as f64,
        per_replication_khat: reps.iter().map(|r| r.k_hat).collect(),
        per_replication_max_stat: reps.iter().map(|r| r.max_stat).collect(),
        per_replication_threshold: reps.iter().map(|r| r.threshold).collect(),
    }
}

fn run_replications<F>(spec: &ExperimentSpec, f: F) -> Result<Vec<Replicate>>
where
    F: Fn(usize, PairedSeries) -> Result<Replicate> + Sync,
{
    (0..spec.replications)
        .into_par_iter()
        .map(|i| {
            spec.sample(i)
                .and_then(|s| f(i, s))
                .map_err(|e| Error::Replication {
                    index: i,
                    source: Box::new(e),
                })
        })
        .collect()
}

/// Threshold-free study: `k̂` is the unconditional profile argmax.
pub fn run_bias_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let cfg = spec.detection_config();
    let reps = run_replications(spec, |_, series| {
        let profile = cusum_profile(&series, &cfg)?;
        let est = argmax_change_point(&profile);
        Ok(Replicate {
            k_hat: Some(est.k_hat),
            max_stat: est.max_stat,
            threshold: None,
        })
    })?;
    Ok(summarize(spec, reps))
}

/// Thresholded study: PDC is the fraction of replications where
/// `max_t W(t)` exceeds its permutation threshold.
pub fn run_pdc_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let policy = spec
        .policy
        .ok_or_else(|| Error::config("the PDC study needs a permutation policy"))?;
    policy.validate()?;
    let cfg = spec.detection_config();
    let reps = run_replications(spec, |i, series| {
        let rep_policy = policy.with_seed(derive_seed(spec.replication_seed(i), &[tag::PERMUTATION]));
        let outcome = detect(&series, &cfg, &rep_policy)?;
        Ok(Replicate {
            k_hat: outcome.k_hat,
            max_stat: outcome.max_stat,
            threshold: Some(outcome.threshold),
        })
    })?;
    Ok(summarize(spec, reps))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub bandwidth: f64,
    pub mean_max_stat: f64,
    /// `log⁴n / (n h)`.
    pub normalizer: f64,
    pub ratio: f64,
}

/// Mean `max_t W(t)` against the no-change rate `log⁴n/(nh)` with `h = n^{-ω}`,
/// over samples drawn by `sample(n, replicate)`.
pub fn scaling_probe_with<F>(
    n_values: &[usize],
    replications: usize,
    omega: f64,
    config: &DetectionConfig,
    sample: F,
) -> Result<Vec<ScalingRow>>
where
    F: Fn(usize, usize) -> Result<PairedSeries> + Sync,
{
    if replications == 0 {
        return Err(Error::config("need at least one replication"));
    }
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::config(format!("omega must lie in (0, 1), got {omega}")));
    }
    n_values
        .iter()
        .map(|&n| {
            let h = (n as f64).powf(-omega);
            let cfg = config.clone().with_bandwidth(h);
            let maxima = (0..replications)
                .into_par_iter()
                .map(|i| {
                    sample(n, i)
                        .and_then(|s| cusum_profile(&s, &cfg))
                        .map(|p| p.max_stat())
                        .map_err(|e| Error::Replication {
                            index: i,
                            source: Box::new(e),
                        })
                })
                .collect::<Result<Vec<f64>>>()?;
            let mean_max_stat = maxima.iter().sum::<f64>() / replications as f64;
            let normalizer = (n as f64).ln().powi(4) / (n as f64 * h);
            Ok(ScalingRow {
                n,
                bandwidth: h,
                mean_max_stat,
                normalizer,
                ratio: mean_max_stat / normalizer,
            })
        })
        .collect()
}

/// Scaling probe on the spec's processes and change model at each `n`.
pub fn theorem_scaling_probe(
    n_values: &[usize],
    spec_template: &ExperimentSpec,
    omega: f64,
) -> Result<Vec<ScalingRow>> {
    spec_template.regressor.validate()?;
    spec_template.noise.validate()?;
    let cfg = spec_template.detection_config();
    cfg.validate()?;
    scaling_probe_with(n_values, spec_template.replications, omega, &cfg, |n, i| {
        let spec = ExperimentSpec {
            n,
            ..spec_template.clone()
        };
        spec.model.validate(n)?;
        spec.sample(i)
    })
}
