//! Direct-summation reference implementations shared by the integration tests.
#![allow(dead_code)]

use npchange::{Aggregation, DetectionConfig, Estimator, EvaluationGrid, KernelSpec, PairedSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// N-W estimate at `x0` from observations `lo..hi` (0-based, half open).
pub fn direct_nw(s: &PairedSeries, lo: usize, hi: usize, x0: f64, h: f64, k: KernelSpec) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for t in lo..hi {
        let w = k.eval((s.x()[t] - x0) / h) / h;
        num += w * s.y()[t];
        den += w;
    }
    (den > 0.0).then(|| num / den)
}

/// Local-linear intercept at `x0` by a centred two-pass weighted least
/// squares fit: weighted means first, then the slope from centred moments.
/// The singularity rule mirrors the library's (two in-support points, floor
/// on the weighted variance of `x - x0`).
pub fn direct_ll(s: &PairedSeries, lo: usize, hi: usize, x0: f64, h: f64, k: KernelSpec) -> Option<f64> {
    let w: Vec<f64> = (lo..hi).map(|t| k.eval((s.x()[t] - x0) / h) / h).collect();
    let s0: f64 = w.iter().sum();
    if s0 <= 0.0 || w.iter().filter(|&&v| v > 0.0).count() < 2 {
        return None;
    }
    let d = |t: usize| s.x()[t] - x0;
    let d_bar = (lo..hi).zip(&w).map(|(t, w)| w * d(t)).sum::<f64>() / s0;
    let y_bar = (lo..hi).zip(&w).map(|(t, w)| w * s.y()[t]).sum::<f64>() / s0;
    let sdd: f64 = (lo..hi).zip(&w).map(|(t, w)| w * (d(t) - d_bar).powi(2)).sum();
    let sdy: f64 = (lo..hi)
        .zip(&w)
        .map(|(t, w)| w * (d(t) - d_bar) * (s.y()[t] - y_bar))
        .sum();
    if !(sdd > 1e-12 * s0) {
        return None;
    }
    Some(y_bar - d_bar * sdy / sdd)
}

/// O(n²m) profile: every window re-summed from scratch.
pub fn direct_profile(s: &PairedSeries, grid: &EvaluationGrid, cfg: &DetectionConfig) -> Vec<(usize, f64)> {
    let n = s.len();
    let trim = cfg.trim(n);
    let est = |lo, hi, x0| match cfg.estimator {
        Estimator::NadarayaWatson => direct_nw(s, lo, hi, x0, cfg.bandwidth, cfg.kernel),
        Estimator::LocalLinear => direct_ll(s, lo, hi, x0, cfg.bandwidth, cfg.kernel),
    };
    (trim..=n - trim)
        .map(|t| {
            let mut acc = 0.0f64;
            for &x0 in grid.points() {
                if let (Some(a), Some(b)) = (est(0, t, x0), est(t, n, x0)) {
                    let d = a - b;
                    acc = match cfg.aggregation {
                        Aggregation::SumOfSquares => acc + d * d,
                        Aggregation::Supremum => acc.max(d.abs()),
                    };
                }
            }
            let w = (t * (n - t)) as f64 / (n * n) as f64;
            (t, w * acc)
        })
        .collect()
}

/// Random series with a regressor in roughly [-2, 2] and a response that may
/// change its regression function part-way through.
pub fn random_series(seed: u64, n: usize) -> PairedSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(1..n);
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let y = x
        .iter()
        .enumerate()
        .map(|(t, &v)| {
            let f = if t < k { 1.0 + v } else { v * v };
            f + rng.random_range(-0.5..0.5)
        })
        .collect();
    PairedSeries::new(x, y).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-12)
}
