//! CUSUM scan over candidate split times.
//!
//! At each split `t` the regression function is estimated on `[1, t]` and on
//! `[t+1, n]` at every grid point; the profile aggregates the differences
//! (sum of squares or maximum absolute value) and weights them by
//! `t(n-t)/n^2`. The change-point estimate is the profile's argmax over the
//! trimmed range `[Δ, n-Δ]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::accumulator::{for_each_row, RowView, ScanAccumulator};
use crate::error::{Error, Result};
use crate::grid::{make_grid, EvaluationGrid, DEFAULT_GRID_POINTS, DEFAULT_HI_PCT, DEFAULT_LO_PCT};
use crate::kernel::KernelSpec;
use crate::series::PairedSeries;

pub const DEFAULT_TRIM: f64 = 0.05;
pub const DEFAULT_BANDWIDTH: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    SumOfSquares,
    Supremum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    #[default]
    NadarayaWatson,
    LocalLinear,
}

/// Estimator × aggregation pairs, named as in the simulation literature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Nwss,
    Nwsup,
    Llss,
    Llsup,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Nwss, Method::Nwsup, Method::Llss, Method::Llsup];

    pub fn parts(self) -> (Estimator, Aggregation) {
        match self {
            Method::Nwss => (Estimator::NadarayaWatson, Aggregation::SumOfSquares),
            Method::Nwsup => (Estimator::NadarayaWatson, Aggregation::Supremum),
            Method::Llss => (Estimator::LocalLinear, Aggregation::SumOfSquares),
            Method::Llsup => (Estimator::LocalLinear, Aggregation::Supremum),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Nwss => "nwss",
            Method::Nwsup => "nwsup",
            Method::Llss => "llss",
            Method::Llsup => "llsup",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::config(format!("unknown method '{s}'; expected nwss, nwsup, llss or llsup")))
    }
}

/// How evaluation points are chosen for a series.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// `m` equidistant points between two percentiles of the regressor.
    Percentile { m: usize, lo_pct: f64, hi_pct: f64 },
    Explicit(EvaluationGrid),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Percentile {
            m: DEFAULT_GRID_POINTS,
            lo_pct: DEFAULT_LO_PCT,
            hi_pct: DEFAULT_HI_PCT,
        }
    }
}

impl GridSpec {
    pub fn resolve(&self, series: &PairedSeries) -> Result<EvaluationGrid> {
        match self {
            GridSpec::Percentile { m, lo_pct, hi_pct } => make_grid(series, *m, *lo_pct, *hi_pct),
            GridSpec::Explicit(grid) => Ok(grid.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionConfig {
    pub bandwidth: f64,
    pub kernel: KernelSpec,
    pub grid: GridSpec,
    /// δ in `Δ = max(1, ⌊nδ⌋)`.
    pub trim_fraction: f64,
    pub aggregation: Aggregation,
    pub estimator: Estimator,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            bandwidth: DEFAULT_BANDWIDTH,
            kernel: KernelSpec::default(),
            grid: GridSpec::default(),
            trim_fraction: DEFAULT_TRIM,
            aggregation: Aggregation::default(),
            estimator: Estimator::default(),
        }
    }
}

impl DetectionConfig {
    pub fn with_method(mut self, method: Method) -> Self {
        let (estimator, aggregation) = method.parts();
        self.estimator = estimator;
        self.aggregation = aggregation;
        self
    }

    pub fn with_bandwidth(mut self, h: f64) -> Self {
        self.bandwidth = h;
        self
    }

    pub fn with_grid(mut self, grid: GridSpec) -> Self {
        self.grid = grid;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth.is_finite() && self.bandwidth > 0.0) {
            return Err(Error::config(format!(
                "bandwidth must be finite and > 0, got {}",
                self.bandwidth
            )));
        }
        if !(self.trim_fraction > 0.0 && self.trim_fraction < 0.5) {
            return Err(Error::config(format!(
                "trim fraction must lie in (0, 0.5), got {}",
                self.trim_fraction
            )));
        }
        if let GridSpec::Percentile { m, lo_pct, hi_pct } = self.grid {
            if m == 0 {
                return Err(Error::config("grid size m must be at least 1"));
            }
            if !(0.0 <= lo_pct && lo_pct < hi_pct && hi_pct <= 100.0) {
                return Err(Error::config(format!(
                    "percentiles must satisfy 0 <= lo < hi <= 100, got ({lo_pct}, {hi_pct})"
                )));
            }
        }
        Ok(())
    }

    /// Boundary trim `Δ = max(1, ⌊nδ⌋)`; at least one so both windows are
    /// non-empty at every scanned split.
    pub fn trim(&self, n: usize) -> usize {
        ((n as f64 * self.trim_fraction).floor() as usize).max(1)
    }

    /// Errors unless `[Δ, n-Δ]` holds at least two split points.
    pub fn check_scan(&self, n: usize) -> Result<usize> {
        let trim = self.trim(n);
        let required = 2 * trim + 2;
        if n < required {
            return Err(Error::ScanInfeasible { n, trim, required });
        }
        Ok(trim)
    }

    pub fn method(&self) -> Method {
        match (self.estimator, self.aggregation) {
            (Estimator::NadarayaWatson, Aggregation::SumOfSquares) => Method::Nwss,
            (Estimator::NadarayaWatson, Aggregation::Supremum) => Method::Nwsup,
            (Estimator::LocalLinear, Aggregation::SumOfSquares) => Method::Llss,
            (Estimator::LocalLinear, Aggregation::Supremum) => Method::Llsup,
        }
    }
}

/// `W(t)` over `t = Δ..=n-Δ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CusumProfile {
    pub n: usize,
    pub trim: usize,
    pub values: Vec<f64>,
    /// Grid points skipped at each split because an estimate was undefined.
    pub undefined_counts: Vec<usize>,
}

impl CusumProfile {
    pub fn first_t(&self) -> usize {
        self.trim
    }

    pub fn last_t(&self) -> usize {
        self.n - self.trim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `W(t)` for a scanned split, `None` outside the trimmed range.
    pub fn at(&self, t: usize) -> Option<f64> {
        (t >= self.first_t() && t <= self.last_t()).then(|| self.values[t - self.trim])
    }

    /// `(t, W(t))` pairs in time order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().enumerate().map(move |(j, &w)| (j + self.trim, w))
    }

    pub fn max_stat(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChangePointEstimate {
    pub k_hat: usize,
    pub max_stat: f64,
    /// Number of splits attaining the maximum.
    pub ties: usize,
}

/// Scans every admissible split of `series` under `config`.
///
/// Streams one grid point at a time, so memory stays O(n); the values are
/// identical to [`profile_from_accumulator`] on a full accumulator.
pub fn cusum_profile(series: &PairedSeries, config: &DetectionConfig) -> Result<CusumProfile> {
    config.validate()?;
    config.check_scan(series.len())?;
    let grid = config.grid.resolve(series)?;
    profile_on_grid(series, &grid, config)
}

/// [`cusum_profile`] with the grid already resolved.
pub(crate) fn profile_on_grid(
    series: &PairedSeries,
    grid: &EvaluationGrid,
    config: &DetectionConfig,
) -> Result<CusumProfile> {
    let trim = config.check_scan(series.len())?;
    let mut scan = Scan::new(series.len(), trim, config.aggregation, config.estimator);
    for_each_row(
        series,
        grid,
        config.bandwidth,
        config.kernel,
        config.estimator == Estimator::LocalLinear,
        |row| scan.add_row(row),
    )?;
    Ok(scan.finish())
}

/// Profile from a prebuilt accumulator. O(n·m).
pub fn profile_from_accumulator(
    acc: &ScanAccumulator,
    trim: usize,
    aggregation: Aggregation,
    estimator: Estimator,
) -> CusumProfile {
    let mut scan = Scan::new(acc.n(), trim, aggregation, estimator);
    for i in 0..acc.grid().len() {
        scan.add_row(acc.row(i));
    }
    scan.finish()
}

/// Profile under construction, one grid point at a time.
struct Scan {
    n: usize,
    trim: usize,
    aggregation: Aggregation,
    estimator: Estimator,
    values: Vec<f64>,
    undefined_counts: Vec<usize>,
}

impl Scan {
    fn new(n: usize, trim: usize, aggregation: Aggregation, estimator: Estimator) -> Self {
        let len = n - 2 * trim + 1;
        Self {
            n,
            trim,
            aggregation,
            estimator,
            values: vec![0.0; len],
            undefined_counts: vec![0; len],
        }
    }

    fn add_row(&mut self, row: RowView<'_>) {
        let n = self.n;
        let estimate = |lo: usize, hi: usize| match self.estimator {
            Estimator::NadarayaWatson => row.nw(lo, hi),
            Estimator::LocalLinear => row.ll(lo, hi),
        };
        for (j, t) in (self.trim..=n - self.trim).enumerate() {
            match (estimate(0, t), estimate(t, n)) {
                (Some(left), Some(right)) => {
                    let d = left - right;
                    match self.aggregation {
                        Aggregation::SumOfSquares => self.values[j] += d * d,
                        Aggregation::Supremum => self.values[j] = self.values[j].max(d.abs()),
                    }
                }
                _ => self.undefined_counts[j] += 1,
            }
        }
    }

    fn finish(mut self) -> CusumProfile {
        let nf = self.n as f64;
        for (j, t) in (self.trim..=self.n - self.trim).enumerate() {
            let weight = (t as f64) * ((self.n - t) as f64) / (nf * nf);
            self.values[j] *= weight;
        }
        CusumProfile {
            n: self.n,
            trim: self.trim,
            values: self.values,
            undefined_counts: self.undefined_counts,
        }
    }
}

/// Smallest split attaining the profile maximum.
pub fn argmax_change_point(profile: &CusumProfile) -> ChangePointEstimate {
    let mut best = 0;
    for (j, &w) in profile.values.iter().enumerate() {
        if w > profile.values[best] {
            best = j;
        }
    }
    let max_stat = profile.values[best];
    let ties = profile.values.iter().filter(|&&w| w == max_stat).count();
    ChangePointEstimate {
        k_hat: best + profile.trim,
        max_stat,
        ties,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accumulator::build_accumulator;

    #[test]
    fn streamed_profile_equals_accumulator_profile() {
        let x: Vec<f64> = (0..120).map(|t| ((t * 37) % 120) as f64 / 40.0 - 1.5).collect();
        let y: Vec<f64> = x.iter().enumerate().map(|(t, &v)| if t < 50 { v } else { v * v } + (t % 7) as f64 * 0.1).collect();
        let s = PairedSeries::new(x, y).unwrap();
        for method in Method::ALL {
            let cfg = DetectionConfig::default().with_method(method).with_bandwidth(0.6);
            let grid = cfg.grid.resolve(&s).unwrap();
            let acc = build_accumulator(&s, &grid, 0.6, cfg.kernel, cfg.estimator == Estimator::LocalLinear).unwrap();
            let from_acc = profile_from_accumulator(&acc, cfg.trim(120), cfg.aggregation, cfg.estimator);
            assert_eq!(cusum_profile(&s, &cfg).unwrap(), from_acc, "{method}");
        }
    }

    fn profile(values: Vec<f64>, trim: usize, n: usize) -> CusumProfile {
        let len = values.len();
        CusumProfile {
            n,
            trim,
            values,
            undefined_counts: vec![0; len],
        }
    }

    #[test]
    fn argmax_ties_pick_smallest() {
        let p = profile(vec![0.0, 3.0, 3.0, 1.0], 2, 7);
        let est = argmax_change_point(&p);
        assert_eq!(est.k_hat, 3);
        assert_eq!(est.max_stat, 3.0);
        assert_eq!(est.ties, 2);
    }

    #[test]
    fn argmax_unimodal() {
        let p = profile(vec![0.1, 0.5, 2.0, 0.7], 3, 9);
        let est = argmax_change_point(&p);
        assert_eq!((est.k_hat, est.ties), (5, 1));
    }

    #[test]
    fn constant_response_gives_zero_profile() {
        let x: Vec<f64> = (0..60).map(|t| ((t * 23) % 60) as f64 / 30.0 - 1.0).collect();
        let s = PairedSeries::new(x, vec![3.0; 60]).unwrap();
        for method in Method::ALL {
            let cfg = DetectionConfig::default().with_method(method).with_bandwidth(0.5);
            let p = cusum_profile(&s, &cfg).unwrap();
            assert_eq!(p.len(), 60 - 2 * 3 + 1);
            assert!(p.values.iter().all(|&w| w.abs() < 1e-24), "{method}");
        }
    }

    #[test]
    fn scan_range_checks() {
        let cfg = DetectionConfig::default();
        assert_eq!(cfg.trim(20), 1);
        assert_eq!(cfg.trim(500), 25);
        assert!(cfg.check_scan(3).is_err());
        assert_eq!(cfg.check_scan(4).unwrap(), 1);
        let s = PairedSeries::new(vec![0.0, 1.0, 2.0], vec![0.0; 3]).unwrap();
        assert!(matches!(cusum_profile(&s, &cfg), Err(Error::ScanInfeasible { .. })));
    }

    #[test]
    fn config_validation() {
        let bad = [
            DetectionConfig::default().with_bandwidth(0.0),
            DetectionConfig { trim_fraction: 0.5, ..Default::default() },
            DetectionConfig { trim_fraction: 0.0, ..Default::default() },
            DetectionConfig::default().with_grid(GridSpec::Percentile { m: 0, lo_pct: 5.0, hi_pct: 95.0 }),
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
        assert!(DetectionConfig::default().validate().is_ok());
    }

    #[test]
    fn method_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(DetectionConfig::default().with_method(m).method(), m);
        }
        assert!("nwxx".parse::<Method>().is_err());
    }

    #[test]
    fn undefined_grid_points_are_counted() {
        // grid point 5.0 is never within bandwidth
        let x: Vec<f64> = (0..20).map(|t| (t % 5) as f64 / 5.0).collect();
        let y: Vec<f64> = (0..20).map(|t| if t < 10 { 0.0 } else { 1.0 }).collect();
        let s = PairedSeries::new(x, y).unwrap();
        let grid = EvaluationGrid::new(vec![0.4, 5.0]).unwrap();
        let cfg = DetectionConfig::default()
            .with_bandwidth(0.5)
            .with_grid(GridSpec::Explicit(grid));
        let p = cusum_profile(&s, &cfg).unwrap();
        assert!(p.undefined_counts.iter().all(|&c| c == 1));
        assert_eq!(argmax_change_point(&p).k_hat, 10);
    }
}
