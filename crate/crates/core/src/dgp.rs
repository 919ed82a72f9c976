//! Simulation processes and change models.
//!
//! Regressors and noise come from Gaussian ARMA(1,1) or ARFIMA(0,d,0)
//! processes. ARFIMA paths start from zero pre-sample values and run the
//! truncated AR(∞) recursion `X_t = Σ_{j≥1} π_j X_{t-j} + u_t`; for long paths
//! the same values are produced through the equivalent truncated MA(∞)
//! convolution, evaluated with an FFT.

use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::rng;
use crate::series::PairedSeries;

pub const DEFAULT_ARMA_BURN_IN: usize = 500;
pub const DEFAULT_ARFIMA_BURN_IN: usize = 1000;

/// Paths at least this long use the FFT convolution route.
const FFT_MIN_LEN: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Process {
    WhiteNoise { innov_sd: f64 },
    /// `X_t = ar·X_{t-1} + u_t + ma·u_{t-1}`.
    Arma11 { ar: f64, ma: f64, innov_sd: f64 },
    /// `(1 - L)^d X_t = u_t`.
    Arfima0d0 { d: f64, innov_sd: f64 },
}

impl Process {
    pub fn default_burn_in(&self) -> usize {
        match self {
            Process::WhiteNoise { .. } => 0,
            Process::Arma11 { .. } => DEFAULT_ARMA_BURN_IN,
            Process::Arfima0d0 { .. } => DEFAULT_ARFIMA_BURN_IN,
        }
    }

    fn innov_sd(&self) -> f64 {
        match *self {
            Process::WhiteNoise { innov_sd }
            | Process::Arma11 { innov_sd, .. }
            | Process::Arfima0d0 { innov_sd, .. } => innov_sd,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sd = self.innov_sd();
        if !(sd.is_finite() && sd > 0.0) {
            return Err(Error::config(format!("innovation sd must be finite and > 0, got {sd}")));
        }
        match *self {
            Process::Arma11 { ar, ma, .. } => {
                if !ar.is_finite() || !ma.is_finite() {
                    return Err(Error::config("ARMA coefficients must be finite"));
                }
                if ar.abs() >= 1.0 {
                    return Err(Error::NonStationary(format!("|ar| = {} must be < 1", ar.abs())));
                }
            }
            Process::Arfima0d0 { d, .. } => {
                if !(d.abs() < 0.5) {
                    return Err(Error::NonStationary(format!("|d| = {} must be < 0.5", d.abs())));
                }
            }
            Process::WhiteNoise { .. } => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgpSpec {
    pub process: Process,
    pub n: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl DgpSpec {
    pub fn new(process: Process, n: usize, seed: u64) -> Self {
        Self {
            process,
            n,
            burn_in: process.default_burn_in(),
            seed,
        }
    }
}

/// Innovation variance making a unit-variance ARFIMA(0,d,0):
/// `Γ(1-d)² / Γ(1-2d)`.
pub fn arfima_unit_variance_innov(d: f64) -> f64 {
    gamma(1.0 - d).powi(2) / gamma(1.0 - 2.0 * d)
}

/// Stationary variance of ARFIMA(0,d,0) with innovation variance `sigma2`.
pub fn arfima_variance(d: f64, sigma2: f64) -> f64 {
    sigma2 * gamma(1.0 - 2.0 * d) / gamma(1.0 - d).powi(2)
}

/// Lag-`k` autocorrelation of ARFIMA(0,d,0).
pub fn arfima_autocorrelation(d: f64, k: usize) -> f64 {
    // ρ_k = ρ_{k-1} (k - 1 + d) / (k - d), equal to the gamma-ratio form
    (1..=k).fold(1.0, |rho, j| {
        let j = j as f64;
        rho * (j - 1.0 + d) / (j - d)
    })
}

fn innovations(spec: &DgpSpec) -> Vec<f64> {
    let mut rng = rng::stream(spec.seed, &[]);
    let sd = spec.process.innov_sd();
    (0..spec.n + spec.burn_in)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sd * z
        })
        .collect()
}

fn check_len(spec: &DgpSpec) -> Result<()> {
    if spec.n == 0 {
        return Err(Error::config("series length must be at least 1"));
    }
    Ok(())
}

/// Gaussian white noise with the process's innovation sd; this is also the
/// innovation stream every other generator consumes for the same seed.
pub fn gen_white_noise(spec: &DgpSpec) -> Result<Vec<f64>> {
    check_len(spec)?;
    spec.process.validate()?;
    let u = innovations(spec);
    Ok(u[spec.burn_in..].to_vec())
}

pub fn gen_arma11(spec: &DgpSpec) -> Result<Vec<f64>> {
    check_len(spec)?;
    spec.process.validate()?;
    let Process::Arma11 { ar, ma, .. } = spec.process else {
        return Err(Error::config("gen_arma11 needs an ARMA(1,1) process"));
    };
    let u = innovations(spec);
    let mut out = Vec::with_capacity(spec.n);
    let (mut x_prev, mut u_prev) = (0.0, 0.0);
    for (t, &ut) in u.iter().enumerate() {
        let x = ar * x_prev + ut + ma * u_prev;
        if t >= spec.burn_in {
            out.push(x);
        }
        x_prev = x;
        u_prev = ut;
    }
    Ok(out)
}

pub fn gen_arfima0d0(spec: &DgpSpec) -> Result<Vec<f64>> {
    check_len(spec)?;
    spec.process.validate()?;
    let Process::Arfima0d0 { d, .. } = spec.process else {
        return Err(Error::config("gen_arfima0d0 needs an ARFIMA(0,d,0) process"));
    };
    let u = innovations(spec);
    let path = if d == 0.0 {
        u
    } else if u.len() < FFT_MIN_LEN {
        fractional_ar_recursion(&u, d)
    } else {
        fractional_ma_fft(&u, d)
    };
    Ok(path[spec.burn_in..].to_vec())
}

/// Dispatches on the process kind.
pub fn generate(spec: &DgpSpec) -> Result<Vec<f64>> {
    match spec.process {
        Process::WhiteNoise { .. } => gen_white_noise(spec),
        Process::Arma11 { .. } => gen_arma11(spec),
        Process::Arfima0d0 { .. } => gen_arfima0d0(spec),
    }
}

/// `π_j` with `π_0 = -1`, `π_j = π_{j-1}(j-1-d)/j`, so that
/// `X_t = Σ_{j≥1} π_j X_{t-j} + u_t`.
pub fn fractional_ar_coefficients(d: f64, len: usize) -> Vec<f64> {
    let mut pi = Vec::with_capacity(len);
    let mut c = -1.0;
    for j in 0..len {
        if j > 0 {
            c *= (j as f64 - 1.0 - d) / j as f64;
        }
        pi.push(c);
    }
    pi
}

/// `ψ_j` of `(1 - L)^{-d}`: `ψ_0 = 1`, `ψ_j = ψ_{j-1}(j-1+d)/j`.
pub fn fractional_ma_coefficients(d: f64, len: usize) -> Vec<f64> {
    let mut psi = Vec::with_capacity(len);
    let mut c = 1.0;
    for j in 0..len {
        if j > 0 {
            c *= (j as f64 - 1.0 + d) / j as f64;
        }
        psi.push(c);
    }
    psi
}

/// Direct truncated AR(∞) recursion with zero pre-sample. O(L²).
pub fn fractional_ar_recursion(u: &[f64], d: f64) -> Vec<f64> {
    let pi = fractional_ar_coefficients(d, u.len());
    let mut x = Vec::with_capacity(u.len());
    for (t, &ut) in u.iter().enumerate() {
        let mut acc = ut;
        for j in 1..=t {
            acc += pi[j] * x[t - j];
        }
        x.push(acc);
    }
    x
}

/// `X_t = Σ_{j<t} ψ_j u_{t-j}` by FFT convolution. O(L log L).
///
/// Identical in exact arithmetic to [`fractional_ar_recursion`]: with zero
/// pre-sample values the truncated AR and MA filters are power-series
/// inverses of each other.
pub fn fractional_ma_fft(u: &[f64], d: f64) -> Vec<f64> {
    let len = u.len();
    let size = (2 * len).next_power_of_two();
    let psi = fractional_ma_coefficients(d, len);
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let pad = |v: &[f64]| {
        let mut buf: Vec<Complex<f64>> = v.iter().map(|&r| Complex::new(r, 0.0)).collect();
        buf.resize(size, Complex::new(0.0, 0.0));
        buf
    };
    let mut a = pad(u);
    let mut b = pad(&psi);
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (p, q) in a.iter_mut().zip(&b) {
        *p *= q;
    }
    inv.process(&mut a);
    let scale = 1.0 / size as f64;
    a[..len].iter().map(|c| c.re * scale).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ChangeModel {
    /// `1 + x + ε` up to `k`, then `x² + ε`.
    M41,
    /// `x² + ε` up to `k`, then `(x + Δφ)² + ε`.
    M42 { delta_phi: f64 },
}

impl ChangeModel {
    pub fn has_change(&self) -> bool {
        match self {
            ChangeModel::M41 => true,
            ChangeModel::M42 { delta_phi } => *delta_phi != 0.0,
        }
    }

    fn before(&self, x: f64) -> f64 {
        match self {
            ChangeModel::M41 => 1.0 + x,
            ChangeModel::M42 { .. } => x * x,
        }
    }

    fn after(&self, x: f64) -> f64 {
        match self {
            ChangeModel::M41 => x * x,
            ChangeModel::M42 { delta_phi } => (x + delta_phi).powi(2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChangeModelSpec {
    pub model: ChangeModel,
    /// Relative change location; `k = ⌊θn⌋`.
    pub theta: f64,
}

impl ChangeModelSpec {
    pub fn change_index(&self, n: usize) -> usize {
        (self.theta * n as f64).floor() as usize
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::config(format!("theta must lie in (0, 1), got {}", self.theta)));
        }
        if let ChangeModel::M42 { delta_phi } = self.model {
            if !delta_phi.is_finite() {
                return Err(Error::config("delta_phi must be finite"));
            }
        }
        if self.change_index(n) == 0 {
            return Err(Error::config(format!(
                "theta = {} puts the change at k = 0 for n = {n}",
                self.theta
            )));
        }
        Ok(())
    }
}

/// Responses from regressors `x` and noise `eps` under a change model.
pub fn apply_change_model(x: &[f64], eps: &[f64], spec: &ChangeModelSpec) -> Result<PairedSeries> {
    if x.len() != eps.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: eps.len(),
        });
    }
    spec.validate(x.len())?;
    let k = spec.change_index(x.len());
    let y = x
        .iter()
        .zip(eps)
        .enumerate()
        .map(|(t, (&xt, &e))| {
            // t is 0-based: observation t+1 is pre-change iff t+1 <= k
            let phi = if t < k { spec.model.before(xt) } else { spec.model.after(xt) };
            phi + e
        })
        .collect();
    PairedSeries::new(x.to_vec(), y)
}

/// Regressor/noise process pairs used in the simulation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DgpFamily {
    /// ARMA(1,1) regressor with unit variance, iid N(0, 0.25) noise.
    Arma,
    /// ARFIMA(0,0.15,0) unit-variance regressor, ARFIMA(0,0.35,0) noise with
    /// innovation variance 0.01.
    Arfima,
}

impl DgpFamily {
    pub fn regressor(self) -> Process {
        match self {
            DgpFamily::Arma => Process::Arma11 {
                ar: 0.5,
                ma: 0.5,
                innov_sd: (3.0f64 / 7.0).sqrt(),
            },
            DgpFamily::Arfima => Process::Arfima0d0 {
                d: 0.15,
                innov_sd: arfima_unit_variance_innov(0.15).sqrt(),
            },
        }
    }

    pub fn noise(self) -> Process {
        match self {
            DgpFamily::Arma => Process::WhiteNoise { innov_sd: 0.5 },
            DgpFamily::Arfima => Process::Arfima0d0 { d: 0.35, innov_sd: 0.1 },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DgpFamily::Arma => "arma",
            DgpFamily::Arfima => "arfima",
        }
    }
}

/// One simulated sample: regressor and noise on independent streams derived
/// from `seed`, combined through the change model.
pub fn simulate_pair(
    regressor: Process,
    noise: Process,
    model: &ChangeModelSpec,
    n: usize,
    seed: u64,
) -> Result<PairedSeries> {
    let x = generate(&DgpSpec::new(regressor, n, rng::derive_seed(seed, &[rng::tag::REGRESSOR])))?;
    let eps = generate(&DgpSpec::new(noise, n, rng::derive_seed(seed, &[rng::tag::NOISE])))?;
    apply_change_model(&x, &eps, model)
}
