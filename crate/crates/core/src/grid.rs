use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::PairedSeries;

pub const DEFAULT_GRID_POINTS: usize = 100;
pub const DEFAULT_LO_PCT: f64 = 5.0;
pub const DEFAULT_HI_PCT: f64 = 95.0;

/// Strictly increasing evaluation points `x_1 < ... < x_m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationGrid {
    points: Vec<f64>,
}

impl EvaluationGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::config("evaluation grid needs at least one point"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::config("evaluation grid points must be finite"));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("evaluation grid must be strictly increasing"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Linear-interpolation quantile of an ascending slice, `pct` in `[0, 100]`.
pub fn quantile_sorted(sorted: &[f64], pct: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = pct / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// `m` equidistant points spanning the `[lo_pct, hi_pct]` percentile interval
/// of the regressor sample. A single point sits at the interval midpoint.
pub fn make_grid(series: &PairedSeries, m: usize, lo_pct: f64, hi_pct: f64) -> Result<EvaluationGrid> {
    if m == 0 {
        return Err(Error::config("grid size m must be at least 1"));
    }
    if !(lo_pct.is_finite() && hi_pct.is_finite() && 0.0 <= lo_pct && lo_pct < hi_pct && hi_pct <= 100.0) {
        return Err(Error::config(format!(
            "percentiles must satisfy 0 <= lo < hi <= 100, got ({lo_pct}, {hi_pct})"
        )));
    }
    let mut sorted = series.x().to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::DegenerateSample("all regressor values are equal".into()));
    }
    let lo = quantile_sorted(&sorted, lo_pct);
    let hi = quantile_sorted(&sorted, hi_pct);
    if m == 1 {
        return EvaluationGrid::new(vec![0.5 * (lo + hi)]);
    }
    if lo >= hi {
        return Err(Error::DegenerateSample(format!(
            "percentile interval [{lo}, {hi}] is empty"
        )));
    }
    let step = (hi - lo) / (m - 1) as f64;
    let mut points: Vec<f64> = (0..m).map(|j| lo + step * j as f64).collect();
    points[m - 1] = hi;
    EvaluationGrid::new(points)
}
