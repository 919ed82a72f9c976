//! Data-driven bandwidth: maximise `F(h) = h · max_t W(t)` over a linear grid
//! of candidates capped at half the regressor range.

use rayon::prelude::*;
use serde::Serialize;

use crate::cusum::{cusum_profile, DetectionConfig, GridSpec};
use crate::error::{Error, Result};
use crate::series::PairedSeries;

pub const DEFAULT_CANDIDATES: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandwidthSearch {
    pub h_grid: Vec<f64>,
    pub f_values: Vec<f64>,
    pub h_star: f64,
}

impl BandwidthSearch {
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (j, &f) in self.f_values.iter().enumerate() {
            if f > self.f_values[best] {
                best = j;
            }
        }
        best
    }
}

/// Candidates `range/(2c) · j` for `j = 1..=c`.
pub fn candidate_bandwidths(series: &PairedSeries, n_candidates: usize) -> Result<Vec<f64>> {
    if n_candidates < 2 {
        return Err(Error::config(format!(
            "need at least 2 bandwidth candidates, got {n_candidates}"
        )));
    }
    let (lo, hi) = series.x_range();
    let range = hi - lo;
    if !(range > 0.0) {
        return Err(Error::DegenerateSample("regressor range is zero".into()));
    }
    let cap = range / 2.0;
    let step = cap / n_candidates as f64;
    let mut grid: Vec<f64> = (1..=n_candidates).map(|j| step * j as f64).collect();
    grid[n_candidates - 1] = cap;
    Ok(grid)
}

/// Evaluates `F(h)` on every candidate and returns the smallest maximiser.
///
/// Only the bandwidth varies: a percentile grid is resolved once on `series`
/// and held fixed across candidates.
pub fn select_bandwidth(
    series: &PairedSeries,
    config_template: &DetectionConfig,
    n_candidates: usize,
) -> Result<BandwidthSearch> {
    let h_grid = candidate_bandwidths(series, n_candidates)?;
    let grid = config_template.grid.resolve(series)?;
    let base = config_template.clone().with_grid(GridSpec::Explicit(grid));
    let f_values = h_grid
        .par_iter()
        .map(|&h| {
            let cfg = base.clone().with_bandwidth(h);
            cusum_profile(series, &cfg).map(|p| p.max_stat() * h)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut search = BandwidthSearch {
        h_grid,
        f_values,
        h_star: 0.0,
    };
    search.h_star = search.h_grid[search.argmax()];
    Ok(search)
}
