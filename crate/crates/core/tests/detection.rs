//! Monte Carlo behaviour of the detector on the simulation designs.

use npchange::dgp::{simulate_pair, ChangeModel, ChangeModelSpec, DgpFamily, Process};
use npchange::{
    detect, run_bias_experiment, run_pdc_experiment, DetectionConfig, ExperimentSpec, Method,
    PermutationPolicy,
};

fn m41() -> ChangeModelSpec {
    ChangeModelSpec { model: ChangeModel::M41, theta: 0.4 }
}

fn m42(delta_phi: f64) -> ChangeModelSpec {
    ChangeModelSpec { model: ChangeModel::M42 { delta_phi }, theta: 0.4 }
}

fn policy(n_permutations: usize) -> PermutationPolicy {
    PermutationPolicy { n_permutations, ..PermutationPolicy::default() }
}

#[test]
fn argmax_lands_near_the_change_on_arma_model_41() {
    let spec = ExperimentSpec::cell(DgpFamily::Arma, m41(), 500, Method::Nwss)
        .with_replications(100)
        .with_seed(2024);
    let report = run_bias_experiment(&spec).unwrap();
    assert_eq!(report.k, 200);
    let near = report.deviations().iter().filter(|d| d.abs() <= 15).count();
    assert!(near >= 90, "only {near}/100 within ±15");
}

#[test]
fn threshold_is_calibrated_when_observations_are_exchangeable() {
    // iid regressor and noise: under no change the original ordering is just
    // one more permutation, so it beats the 99th of 100 permutation maxima
    // with probability 2/101.
    let mut spec = ExperimentSpec::cell(DgpFamily::Arma, m42(0.0), 200, Method::Nwss)
        .with_policy(policy(100))
        .with_replications(200)
        .with_seed(7);
    spec.regressor = Process::WhiteNoise { innov_sd: 1.0 };
    let report = run_pdc_experiment(&spec).unwrap();
    assert!(report.pdc <= 0.05, "rejection rate {}", report.pdc);
}

#[test]
fn detection_rate_grows_with_the_size_of_the_change() {
    let rates: Vec<f64> = [0.1, 0.3, 0.5]
        .iter()
        .map(|&dp| {
            let spec = ExperimentSpec::cell(DgpFamily::Arma, m42(dp), 300, Method::Nwss)
                .with_policy(policy(100))
                .with_replications(60)
                .with_seed(11);
            run_pdc_experiment(&spec).unwrap().pdc
        })
        .collect();
    assert!(rates[0] <= rates[1] && rates[1] <= rates[2], "{rates:?}");
    assert!(rates[2] > 0.9, "{rates:?}");
}

#[test]
fn detection_is_reproducible_from_its_seed() {
    let s = simulate_pair(DgpFamily::Arma.regressor(), DgpFamily::Arma.noise(), &m41(), 400, 5).unwrap();
    let cfg = DetectionConfig::default();
    let a = detect(&s, &cfg, &policy(50).with_seed(3)).unwrap();
    let b = detect(&s, &cfg, &policy(50).with_seed(3)).unwrap();
    assert_eq!(a, b);
    let c = detect(&s, &cfg, &policy(50).with_seed(4)).unwrap();
    assert_eq!(a.max_stat, c.max_stat);
    assert!(a.change_detected && c.change_detected);
}

#[test]
fn sum_of_squares_is_at_least_as_accurate_as_supremum() {
    let run = |method| {
        let spec = ExperimentSpec::cell(DgpFamily::Arma, m41(), 500, method)
            .with_replications(100)
            .with_seed(99);
        run_bias_experiment(&spec).unwrap().abias.unwrap()
    };
    let (ss, sup) = (run(Method::Nwss), run(Method::Nwsup));
    assert!(ss <= sup, "nwss {ss} vs nwsup {sup}");
}

#[test]
fn relative_error_shrinks_with_sample_size() {
    let rel: Vec<f64> = [200, 500, 1000]
        .iter()
        .map(|&n| {
            let spec = ExperimentSpec::cell(DgpFamily::Arma, m41(), n, Method::Nwss)
                .with_replications(60)
                .with_seed(17);
            run_bias_experiment(&spec).unwrap().abias.unwrap() / n as f64
        })
        .collect();
    assert!(rel[0] >= rel[1] && rel[1] >= rel[2], "{rel:?}");
}
