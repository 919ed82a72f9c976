//! Sample moments of the generated processes.

use npchange::dgp::{arfima_autocorrelation, generate, DgpFamily, DgpSpec, Process};

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

fn autocorrelation(x: &[f64], lag: usize) -> f64 {
    let m = mean(x);
    let c0: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
    let ck: f64 = x.windows(lag + 1).map(|w| (w[0] - m) * (w[lag] - m)).sum();
    ck / c0
}

#[test]
fn arma_regressor_has_unit_variance() {
    let x = generate(&DgpSpec::new(DgpFamily::Arma.regressor(), 1_000_000, 31)).unwrap();
    let v = variance(&x);
    assert!((v - 1.0).abs() <= 0.02, "{v}");
}

#[test]
fn arma_regressor_is_centred() {
    let x = generate(&DgpSpec::new(DgpFamily::Arma.regressor(), 1_000_000, 32)).unwrap();
    // long-run sd of ARMA(1,1): σ (1 + ma) / (1 - ar)
    let long_run_sd = (3.0f64 / 7.0).sqrt() * 1.5 / 0.5;
    let bound = 3.0 * long_run_sd / 1e3;
    assert!(mean(&x).abs() <= bound, "{} vs ±{bound}", mean(&x));
}

#[test]
fn degenerate_arma_is_white() {
    let p = Process::Arma11 { ar: 0.0, ma: 0.0, innov_sd: 1.0 };
    let x = generate(&DgpSpec::new(p, 100_000, 33)).unwrap();
    let r1 = autocorrelation(&x, 1);
    assert!(r1.abs() <= 0.01, "{r1}");
}

#[test]
fn arma_autocorrelation_matches_theory() {
    // ρ_1 = (1 + φθ)(φ + θ) / (1 + 2φθ + θ²), ρ_k = φ ρ_{k-1}
    let x = generate(&DgpSpec::new(DgpFamily::Arma.regressor(), 1_000_000, 34)).unwrap();
    let rho1 = 1.25 * 1.0 / 1.75;
    for (lag, rho) in [(1, rho1), (2, 0.5 * rho1), (3, 0.25 * rho1)] {
        let r = autocorrelation(&x, lag);
        assert!((r - rho).abs() <= 0.01, "lag {lag}: {r} vs {rho}");
    }
}

#[test]
fn arfima_regressor_has_unit_variance() {
    let x = generate(&DgpSpec::new(DgpFamily::Arfima.regressor(), 1_000_000, 35)).unwrap();
    let v = variance(&x);
    assert!((v - 1.0).abs() <= 0.05, "{v}");
}

#[test]
fn long_memory_autocorrelations_match_theory() {
    let p = Process::Arfima0d0 { d: 0.35, innov_sd: 1.0 };
    let x = generate(&DgpSpec::new(p, 1_000_000, 36)).unwrap();
    for lag in [1, 5, 10] {
        let (r, rho) = (autocorrelation(&x, lag), arfima_autocorrelation(0.35, lag));
        assert!((r - rho).abs() <= 0.03, "lag {lag}: {r} vs {rho}");
    }
    // slow decay: still clearly positive far out
    let r100 = autocorrelation(&x, 100);
    assert!(r100 > 0.1, "{r100}");
}

#[test]
fn generated_noise_keeps_its_innovation_scale() {
    let e = generate(&DgpSpec::new(DgpFamily::Arma.noise(), 200_000, 37)).unwrap();
    assert!((variance(&e) - 0.25).abs() <= 0.005);
}
