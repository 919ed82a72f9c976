//! Symmetries and structural invariants of the CUSUM profile.

mod common;

use common::{random_series, rel_close};
use npchange::grid::EvaluationGrid;
use npchange::threshold::{nearest_rank_quantile, permutation_maxima, permutation_order};
use npchange::{
    argmax_change_point, build_accumulator, cusum_profile, make_grid, reverse_series, DetectionConfig,
    GridSpec, KernelSpec, Method, PairedSeries, PermutationPolicy,
};
use proptest::prelude::*;

fn config(method: Method) -> DetectionConfig {
    DetectionConfig::default().with_method(method).with_bandwidth(0.5)
}

#[test]
fn time_reversal_mirrors_the_profile() {
    for seed in 0..20u64 {
        let s = random_series(seed, 80 + seed as usize);
        let n = s.len();
        let r = reverse_series(&s);
        for method in Method::ALL {
            let cfg = config(method);
            let p = cusum_profile(&s, &cfg).unwrap();
            let q = cusum_profile(&r, &cfg).unwrap();
            for (t, w) in p.iter() {
                let mirrored = q.at(n - t).unwrap();
                assert!(rel_close(w, mirrored, 1e-9), "seed {seed} {method} t={t}: {w} vs {mirrored}");
            }
        }
    }
}

#[test]
fn response_shift_leaves_profile_unchanged() {
    for seed in 0..20u64 {
        let s = random_series(seed, 100);
        for c in [-3.5, 0.25, 1e3] {
            let shifted = s.map_y(|y| y + c);
            for method in Method::ALL {
                let cfg = config(method);
                let p = cusum_profile(&s, &cfg).unwrap();
                let q = cusum_profile(&shifted, &cfg).unwrap();
                let scale = p.max_stat().max(1e-12);
                for ((t, a), (_, b)) in p.iter().zip(q.iter()) {
                    // the shift perturbs the stored responses by an ulp of c, so compare on the profile scale
                    assert!((a - b).abs() <= 1e-9 * scale, "seed {seed} {method} c={c} t={t}: {a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn response_scale_scales_profile() {
    for seed in 0..20u64 {
        let s = random_series(seed, 100);
        for c in [2.0, -0.5, 10.0] {
            let scaled = s.map_y(|y| c * y);
            for method in Method::ALL {
                let cfg = config(method);
                let p = cusum_profile(&s, &cfg).unwrap();
                let q = cusum_profile(&scaled, &cfg).unwrap();
                let factor = match method {
                    Method::Nwss | Method::Llss => c * c,
                    Method::Nwsup | Method::Llsup => c.abs(),
                };
                for ((t, a), (_, b)) in p.iter().zip(q.iter()) {
                    assert!(rel_close(a * factor, b, 1e-9), "seed {seed} {method} t={t}");
                }
                assert_eq!(argmax_change_point(&p).k_hat, argmax_change_point(&q).k_hat);
            }
        }
    }
}

#[test]
fn power_of_two_scaling_is_exact() {
    let s = random_series(5, 120);
    let p = cusum_profile(&s, &config(Method::Nwss)).unwrap();
    let q = cusum_profile(&s.map_y(|y| 2.0 * y), &config(Method::Nwss)).unwrap();
    for ((_, a), (_, b)) in p.iter().zip(q.iter()) {
        assert_eq!(4.0 * a, b);
    }
}

#[test]
fn single_grid_point_links_both_aggregations() {
    // With one grid point, SS(t) = w_t d_t² and SUP(t) = w_t |d_t|, so SUP² = w_t · SS.
    for seed in 0..10u64 {
        let s = random_series(seed, 90);
        let grid = GridSpec::Explicit(EvaluationGrid::new(vec![0.1]).unwrap());
        let ss = cusum_profile(&s, &config(Method::Nwss).with_grid(grid.clone())).unwrap();
        let sup = cusum_profile(&s, &config(Method::Nwsup).with_grid(grid)).unwrap();
        let n = s.len() as f64;
        for ((t, a), (_, b)) in ss.iter().zip(sup.iter()) {
            let w = t as f64 * (n - t as f64) / (n * n);
            assert!(rel_close(b * b, w * a, 1e-12), "t={t}");
        }
    }
}

#[test]
fn permutations_keep_pairs_together() {
    let s = random_series(11, 150);
    for r in 0..5 {
        let order = permutation_order(s.len(), 42, r);
        let p = s.reindexed(&order);
        let mut original: Vec<(f64, f64)> = s.x().iter().copied().zip(s.y().iter().copied()).collect();
        let mut permuted: Vec<(f64, f64)> = p.x().iter().copied().zip(p.y().iter().copied()).collect();
        assert_ne!(original, permuted);
        original.sort_by(|a, b| a.0.total_cmp(&b.0));
        permuted.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(original, permuted);
    }
}

#[test]
fn threshold_is_monotone_in_level_and_reproducible() {
    let s = random_series(2, 200);
    let cfg = config(Method::Nwss);
    let policy = PermutationPolicy {
        n_permutations: 100,
        ..PermutationPolicy::default()
    }
    .with_seed(9);
    let maxima = permutation_maxima(&s, &cfg, &policy).unwrap();
    assert_eq!(maxima, permutation_maxima(&s, &cfg, &policy).unwrap());
    let levels = [0.5, 0.8, 0.9, 0.95, 0.99, 1.0];
    let thresholds: Vec<f64> = levels.iter().map(|&l| nearest_rank_quantile(&maxima, l)).collect();
    assert!(thresholds.windows(2).all(|w| w[0] <= w[1]), "{thresholds:?}");
    assert_eq!(thresholds[5], maxima.iter().copied().fold(f64::MIN, f64::max));
}

#[test]
fn thread_count_does_not_change_results() {
    let s = random_series(4, 250);
    let cfg = config(Method::Nwss);
    let policy = PermutationPolicy {
        n_permutations: 64,
        ..PermutationPolicy::default()
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| permutation_maxima(&s, &cfg, &policy).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}

fn arb_series() -> impl Strategy<Value = PairedSeries> {
    (12usize..80).prop_flat_map(|n| {
        (
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(-100.0f64..100.0, n),
        )
            .prop_filter_map("regressor needs spread", |(x, y)| {
                let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (hi - lo > 1e-3).then(|| PairedSeries::new(x, y).unwrap())
            })
    })
}

proptest! {
    #[test]
    fn profile_is_nonnegative_and_finite(s in arb_series(), h in 0.05f64..4.0, mi in 0usize..4) {
        let cfg = DetectionConfig::default().with_method(Method::ALL[mi]).with_bandwidth(h);
        let p = cusum_profile(&s, &cfg).unwrap();
        prop_assert_eq!(p.first_t(), cfg.trim(s.len()));
        prop_assert_eq!(p.last_t(), s.len() - cfg.trim(s.len()));
        for (_, w) in p.iter() {
            prop_assert!(w.is_finite() && w >= 0.0);
        }
        let est = argmax_change_point(&p);
        prop_assert!(est.k_hat >= p.first_t() && est.k_hat <= p.last_t());
        prop_assert_eq!(p.at(est.k_hat), Some(p.max_stat()));
    }

    #[test]
    fn kernel_mass_prefix_is_monotone(s in arb_series(), h in 0.05f64..4.0, m in 1usize..12) {
        let grid = make_grid(&s, m, 5.0, 95.0);
        prop_assume!(grid.is_ok());
        let grid = grid.unwrap();
        let acc = build_accumulator(&s, &grid, h, KernelSpec::Epanechnikov, false).unwrap();
        for i in 0..grid.len() {
            let row = acc.cum_k(i);
            prop_assert_eq!(row[0], 0.0);
            prop_assert!(row.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
