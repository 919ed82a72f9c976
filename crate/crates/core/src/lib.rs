//! Offline change-point detection for nonparametric regression
//! `Y_t = φ(X_t) + ε_t` with serially dependent observations.
//!
//! The detector compares kernel regression estimates fitted before and after
//! each candidate split on a fixed grid of regressor values, aggregates the
//! differences into a weighted CUSUM profile, and locates the change at the
//! profile's maximum. A permutation threshold decides whether a change is
//! present at all; binary segmentation extends this to several changes.
//!
//! ```
//! use npchange::{cusum_profile, argmax_change_point, DetectionConfig, PairedSeries};
//!
//! let x: Vec<f64> = (0..200).map(|t| ((t * 71) % 200) as f64 / 100.0 - 1.0).collect();
//! let y: Vec<f64> = x.iter().enumerate()
//!     .map(|(t, v)| if t < 80 { 1.0 + v } else { v * v })
//!     .collect();
//! let series = PairedSeries::new(x, y).unwrap();
//! let profile = cusum_profile(&series, &DetectionConfig::default()).unwrap();
//! let k_hat = argmax_change_point(&profile).k_hat;
//! assert!(k_hat.abs_diff(80) <= 3, "{k_hat}");
//! ```

pub mod accumulator;
pub mod bandwidth;
pub mod cusum;
pub mod dgp;
pub mod error;
pub mod experiment;
pub mod export;
pub mod grid;
pub mod kernel;
pub mod rng;
pub mod segmentation;
pub mod series;
pub mod threshold;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use accumulator::{build_accumulator, ScanAccumulator, Window};
pub use bandwidth::{select_bandwidth, BandwidthSearch};
pub use cusum::{
    argmax_change_point, cusum_profile, Aggregation, ChangePointEstimate, CusumProfile, DetectionConfig,
    Estimator, GridSpec, Method,
};
pub use dgp::{
    apply_change_model, gen_arfima0d0, gen_arma11, ChangeModel, ChangeModelSpec, DgpFamily, DgpSpec, Process,
};
pub use error::{Error, Result};
pub use experiment::{
    run_bias_experiment, run_pdc_experiment, theorem_scaling_probe, ExperimentReport, ExperimentSpec,
    ScalingRow,
};
pub use grid::{make_grid, EvaluationGrid};
pub use kernel::{kernel_eval, KernelSpec};
pub use segmentation::{binary_segmentation, SegmentDecision, SegmentRecord, SegmentationResult};
pub use series::{reverse_series, PairedSeries};
pub use threshold::{detect, permutation_threshold, DetectionOutcome, PermutationPolicy};
