//! Command-line arguments and their resolution into run settings.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use npchange::bandwidth::DEFAULT_CANDIDATES;
use npchange::{Aggregation, ChangeModel, DgpFamily, Estimator, KernelSpec, Method};

use crate::error::{CliError, CliResult};
use crate::input::InputSpec;
use crate::manifest::{
    BandwidthSetting, BandwidthSettings, DetectSettings, GenSettings, PermutationSettings, RunSettings,
    ScanSettings, SegmentSettings, SimulateSettings, SimulationMode,
};

const AFTER_HELP: &str = "\
Environment:
  NPCHANGE_THREADS  worker threads (same as --threads; results do not depend on it)

Exit codes:
  0  success
  1  internal error
  2  configuration error (bad flag value or combination, invalid manifest)
  3  I/O error (unreadable input, unwritable output directory)
  4  input schema error (missing column, unparsable row, digest mismatch)
  5  series too short to scan at the requested trim";

#[derive(Debug, Parser)]
#[command(name = "npchange", version, about = "Change-point detection in nonparametric regression", after_help = AFTER_HELP)]
pub struct Cli {
    /// Worker threads for parallel scans.
    #[arg(long, global = true, env = "NPCHANGE_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test a series for a single change point.
    Detect(DetectArgs),
    /// Locate several change points by binary segmentation.
    Segment(SegmentArgs),
    /// Evaluate the bandwidth criterion h * max_t W(t) over candidates.
    Bandwidth(BandwidthArgs),
    /// Run a Monte Carlo study on simulated data.
    Simulate(SimulateArgs),
    /// Write a simulated series as CSV.
    Gen(GenArgs),
    /// Re-execute the run recorded in a manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AggregationArg {
    Ss,
    Sup,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EstimatorArg {
    Nw,
    Ll,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KernelArg {
    Epanechnikov,
    Uniform,
    Triangular,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Nwss,
    Nwsup,
    Llss,
    Llsup,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DgpArg {
    Arma,
    Arfima,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    M41,
    M42,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Bias,
    Pdc,
    ScalingProbe,
}

impl From<KernelArg> for KernelSpec {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Epanechnikov => KernelSpec::Epanechnikov,
            KernelArg::Uniform => KernelSpec::Uniform,
            KernelArg::Triangular => KernelSpec::Triangular,
        }
    }
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Nwss => Method::Nwss,
            MethodArg::Nwsup => Method::Nwsup,
            MethodArg::Llss => Method::Llss,
            MethodArg::Llsup => Method::Llsup,
        }
    }
}

impl From<DgpArg> for DgpFamily {
    fn from(d: DgpArg) -> Self {
        match d {
            DgpArg::Arma => DgpFamily::Arma,
            DgpArg::Arfima => DgpFamily::Arfima,
        }
    }
}

impl From<ModeArg> for SimulationMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Bias => SimulationMode::Bias,
            ModeArg::Pdc => SimulationMode::Pdc,
            ModeArg::ScalingProbe => SimulationMode::ScalingProbe,
        }
    }
}

fn method_of(estimator: EstimatorArg, aggregation: AggregationArg) -> Method {
    let e = match estimator {
        EstimatorArg::Nw => Estimator::NadarayaWatson,
        EstimatorArg::Ll => Estimator::LocalLinear,
    };
    let a = match aggregation {
        AggregationArg::Ss => Aggregation::SumOfSquares,
        AggregationArg::Sup => Aggregation::Supremum,
    };
    Method::ALL.into_iter().find(|m| m.parts() == (e, a)).expect("every pair is a method")
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// CSV file with a header row.
    pub input: PathBuf,
    #[arg(long, default_value = "x")]
    pub x_col: String,
    #[arg(long, default_value = "y")]
    pub y_col: String,
    /// Column passed through to outputs (dates, say).
    #[arg(long)]
    pub label_col: Option<String>,
}

impl InputArgs {
    fn spec(&self) -> InputSpec {
        InputSpec {
            path: self.input.display().to_string(),
            x_col: self.x_col.clone(),
            y_col: self.y_col.clone(),
            label_col: self.label_col.clone(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Number of evaluation points.
    #[arg(long, default_value_t = 100)]
    pub grid_m: usize,
    /// Lower percentile of the regressor spanned by the grid.
    #[arg(long, default_value_t = 5.0)]
    pub grid_lo: f64,
    /// Upper percentile of the regressor spanned by the grid.
    #[arg(long, default_value_t = 95.0)]
    pub grid_hi: f64,
    /// Boundary trim fraction.
    #[arg(long, default_value_t = 0.05)]
    pub trim: f64,
    #[arg(long, value_enum, default_value_t = KernelArg::Epanechnikov)]
    pub kernel: KernelArg,
}

impl GridArgs {
    fn settings(&self) -> CliResult<ScanSettings> {
        if self.grid_m == 0 {
            return Err(CliError::config("--grid-m must be at least 1"));
        }
        if !(0.0 <= self.grid_lo && self.grid_lo < self.grid_hi && self.grid_hi <= 100.0) {
            return Err(CliError::config(format!(
                "--grid-lo and --grid-hi must satisfy 0 <= lo < hi <= 100, got {} and {}",
                self.grid_lo, self.grid_hi
            )));
        }
        if !(self.trim > 0.0 && self.trim < 0.5) {
            return Err(CliError::config(format!("--trim must lie in (0, 0.5), got {}", self.trim)));
        }
        Ok(ScanSettings {
            grid_m: self.grid_m,
            grid_lo_pct: self.grid_lo,
            grid_hi_pct: self.grid_hi,
            trim: self.trim,
            kernel: self.kernel.into(),
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct MethodArgs {
    #[arg(long, value_enum, default_value_t = AggregationArg::Ss)]
    pub aggregation: AggregationArg,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Nw)]
    pub estimator: EstimatorArg,
}

#[derive(Debug, Clone, Args)]
pub struct PermutationArgs {
    #[arg(long, default_value_t = 200)]
    pub permutations: usize,
    /// Quantile level of the permutation threshold.
    #[arg(long, default_value_t = 0.99)]
    pub level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl PermutationArgs {
    fn settings(&self) -> CliResult<PermutationSettings> {
        check_permutations(self.permutations, self.level)?;
        Ok(PermutationSettings {
            permutations: self.permutations,
            level: self.level,
            seed: self.seed,
        })
    }
}

fn check_permutations(permutations: usize, level: f64) -> CliResult<()> {
    if permutations == 0 {
        return Err(CliError::config("--permutations must be at least 1"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(CliError::config(format!("--level must lie in (0, 1), got {level}")));
    }
    Ok(())
}

/// Bandwidth as a positive real or `auto`.
fn parse_bandwidth(s: &str) -> Result<BandwidthFlag, String> {
    if s == "auto" {
        return Ok(BandwidthFlag::Auto);
    }
    match s.parse::<f64>() {
        Ok(h) if h.is_finite() && h > 0.0 => Ok(BandwidthFlag::Fixed(h)),
        _ => Err(format!("expected a positive real or 'auto', got '{s}'")),
    }
}

#[derive(Debug, Clone, Copy)]
pub enum BandwidthFlag {
    Fixed(f64),
    Auto,
}

#[derive(Debug, Clone, Args)]
pub struct BandwidthChoiceArgs {
    /// Kernel bandwidth, or `auto` to maximise h * max_t W(t).
    #[arg(long, default_value = "1", value_parser = parse_bandwidth)]
    pub bandwidth: BandwidthFlag,
    /// Candidate count for `--bandwidth auto`.
    #[arg(long)]
    pub candidates: Option<usize>,
}

impl BandwidthChoiceArgs {
    fn setting(&self) -> CliResult<BandwidthSetting> {
        match (self.bandwidth, self.candidates) {
            (BandwidthFlag::Fixed(_), Some(_)) => {
                Err(CliError::config("--candidates only applies with --bandwidth auto"))
            }
            (BandwidthFlag::Fixed(h), None) => Ok(BandwidthSetting::Fixed(h)),
            (BandwidthFlag::Auto, c) => Ok(BandwidthSetting::Auto {
                candidates: check_candidates(c.unwrap_or(DEFAULT_CANDIDATES))?,
            }),
        }
    }
}

fn check_candidates(c: usize) -> CliResult<usize> {
    if c < 2 {
        return Err(CliError::config(format!("--candidates must be at least 2, got {c}")));
    }
    Ok(c)
}

#[derive(Debug, Clone, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub bandwidth: BandwidthChoiceArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    #[command(flatten)]
    pub permutation: PermutationArgs,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SegmentArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub bandwidth: BandwidthChoiceArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    #[command(flatten)]
    pub permutation: PermutationArgs,
    /// Segments shorter than this are not split further.
    #[arg(long, default_value_t = 50)]
    pub min_segment: usize,
    /// Re-select the bandwidth inside every segment.
    #[arg(long)]
    pub rebandwidth_per_segment: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BandwidthArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    #[arg(long, default_value_t = DEFAULT_CANDIDATES)]
    pub candidates: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = DgpArg::Arma)]
    pub dgp: DgpArg,
    #[arg(long, value_enum, default_value_t = ModelArg::M41)]
    pub model: ModelArg,
    /// Shift of the post-change regression function (model m42 only).
    #[arg(long)]
    pub delta_phi: Option<f64>,
    /// Relative change location.
    #[arg(long, default_value_t = 0.4)]
    pub theta: f64,
    /// Sample sizes, comma separated [default: 500; 200,500,1000,2000 for the scaling probe].
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Methods, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "nwss")]
    pub method: Vec<MethodArg>,
    /// Replications per cell.
    #[arg(long = "replications", visible_alias = "N", default_value_t = 200)]
    pub replications: usize,
    /// Fixed bandwidth [default: 1; not used by the scaling probe].
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Bandwidth exponent for the scaling probe, h = n^-omega [default: 0.2].
    #[arg(long)]
    pub omega: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Permutations per replication [pdc only; default: 200].
    #[arg(long)]
    pub permutations: Option<usize>,
    /// Threshold quantile level [pdc only; default: 0.99].
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value_t = DgpArg::Arma)]
    pub dgp: DgpArg,
    #[arg(long, value_enum, default_value_t = ModelArg::M41)]
    pub model: ModelArg,
    #[arg(long)]
    pub delta_phi: Option<f64>,
    #[arg(long, default_value_t = 0.4)]
    pub theta: f64,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RerunArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn change_model(model: ModelArg, delta_phi: Option<f64>) -> CliResult<ChangeModel> {
    match (model, delta_phi) {
        (ModelArg::M41, Some(_)) => Err(CliError::config("--delta-phi applies only to --model m42")),
        (ModelArg::M41, None) => Ok(ChangeModel::M41),
        (ModelArg::M42, d) => {
            let delta_phi = d.unwrap_or(0.0);
            if !delta_phi.is_finite() {
                return Err(CliError::config("--delta-phi must be finite"));
            }
            Ok(ChangeModel::M42 { delta_phi })
        }
    }
}

fn check_theta(theta: f64) -> CliResult<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(CliError::config(format!("--theta must lie in (0, 1), got {theta}")));
    }
    Ok(theta)
}

fn check_min_segment(min_segment: usize) -> CliResult<usize> {
    if min_segment < 2 {
        return Err(CliError::config(format!("--min-segment must be at least 2, got {min_segment}")));
    }
    Ok(min_segment)
}

impl SimulateArgs {
    fn settings(&self) -> CliResult<SimulateSettings> {
        let mode: SimulationMode = self.mode.into();
        let probe = mode == SimulationMode::ScalingProbe;
        let pdc = mode == SimulationMode::Pdc;
        if self.replications == 0 {
            return Err(CliError::config("--replications must be at least 1"));
        }
        if probe && self.bandwidth.is_some() {
            return Err(CliError::config(
                "--bandwidth does not apply to --mode scaling-probe (it uses h = n^-omega)",
            ));
        }
        if !probe && self.omega.is_some() {
            return Err(CliError::config("--omega applies only to --mode scaling-probe"));
        }
        if !pdc && (self.permutations.is_some() || self.level.is_some()) {
            let flag = if self.permutations.is_some() { "--permutations" } else { "--level" };
            return Err(CliError::config(format!("{flag} applies only to --mode pdc")));
        }
        let n = if self.n.is_empty() {
            if probe {
                vec![200, 500, 1000, 2000]
            } else {
                vec![500]
            }
        } else {
            self.n.clone()
        };
        if let Some(&bad) = n.iter().find(|&&v| v < 2) {
            return Err(CliError::config(format!("--n values must be at least 2, got {bad}")));
        }
        let bandwidth = match self.bandwidth {
            Some(h) if !(h.is_finite() && h > 0.0) => {
                return Err(CliError::config(format!("--bandwidth must be positive, got {h}")))
            }
            Some(h) => Some(h),
            None => (!probe).then_some(npchange::cusum::DEFAULT_BANDWIDTH),
        };
        let omega = match self.omega {
            Some(w) if !(w > 0.0 && w < 1.0) => {
                return Err(CliError::config(format!("--omega must lie in (0, 1), got {w}")))
            }
            Some(w) => Some(w),
            None => probe.then_some(npchange::experiment::DEFAULT_OMEGA),
        };
        let permutation = if pdc {
            let permutations = self.permutations.unwrap_or(npchange::threshold::DEFAULT_PERMUTATIONS);
            let level = self.level.unwrap_or(npchange::threshold::DEFAULT_LEVEL);
            check_permutations(permutations, level)?;
            Some(PermutationSettings {
                permutations,
                level,
                seed: self.seed,
            })
        } else {
            None
        };
        let mut methods: Vec<Method> = Vec::new();
        for m in self.method.iter().map(|&m| Method::from(m)) {
            if !methods.contains(&m) {
                methods.push(m);
            }
        }
        Ok(SimulateSettings {
            mode,
            dgp: self.dgp.into(),
            model: change_model(self.model, self.delta_phi)?,
            theta: check_theta(self.theta)?,
            n,
            methods,
            replications: self.replications,
            bandwidth,
            omega,
            scan: self.grid.settings()?,
            permutation,
            seed: self.seed,
        })
    }
}

/// The settings to run and where to write, or a manifest to replay.
pub enum Resolved {
    Run { settings: RunSettings, out_dir: PathBuf },
    Rerun { manifest: PathBuf, out_dir: PathBuf },
}

impl Command {
    pub fn resolve(&self) -> CliResult<Resolved> {
        let run = |settings: RunSettings, out_dir: &PathBuf| {
            Ok(Resolved::Run {
                settings,
                out_dir: out_dir.clone(),
            })
        };
        match self {
            Command::Detect(a) => run(
                RunSettings::Detect(DetectSettings {
                    input: a.input.spec(),
                    method: method_of(a.method.estimator, a.method.aggregation),
                    bandwidth: a.bandwidth.setting()?,
                    scan: a.grid.settings()?,
                    permutation: a.permutation.settings()?,
                }),
                &a.out_dir,
            ),
            Command::Segment(a) => {
                let bandwidth = a.bandwidth.setting()?;
                let segment_candidates = match bandwidth {
                    BandwidthSetting::Auto { candidates } => candidates,
                    BandwidthSetting::Fixed(_) => DEFAULT_CANDIDATES,
                };
                run(
                    RunSettings::Segment(SegmentSettings {
                        input: a.input.spec(),
                        method: method_of(a.method.estimator, a.method.aggregation),
                        bandwidth,
                        scan: a.grid.settings()?,
                        permutation: a.permutation.settings()?,
                        min_segment: check_min_segment(a.min_segment)?,
                        rebandwidth_per_segment: a.rebandwidth_per_segment,
                        segment_candidates,
                    }),
                    &a.out_dir,
                )
            }
            Command::Bandwidth(a) => run(
                RunSettings::Bandwidth(BandwidthSettings {
                    input: a.input.spec(),
                    method: method_of(a.method.estimator, a.method.aggregation),
                    candidates: check_candidates(a.candidates)?,
                    scan: a.grid.settings()?,
                }),
                &a.out_dir,
            ),
            Command::Simulate(a) => run(RunSettings::Simulate(a.settings()?), &a.out_dir),
            Command::Gen(a) => run(
                RunSettings::Gen(GenSettings {
                    dgp: a.dgp.into(),
                    model: change_model(a.model, a.delta_phi)?,
                    theta: check_theta(a.theta)?,
                    n: a.n,
                    seed: a.seed,
                }),
                &a.out_dir,
            ),
            Command::Rerun(a) => Ok(Resolved::Rerun {
                manifest: a.manifest.clone(),
                out_dir: a.out_dir.clone(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn every_flag_pair_maps_to_its_method() {
        assert_eq!(method_of(EstimatorArg::Nw, AggregationArg::Ss), Method::Nwss);
        assert_eq!(method_of(EstimatorArg::Nw, AggregationArg::Sup), Method::Nwsup);
        assert_eq!(method_of(EstimatorArg::Ll, AggregationArg::Ss), Method::Llss);
        assert_eq!(method_of(EstimatorArg::Ll, AggregationArg::Sup), Method::Llsup);
    }

    #[test]
    fn bandwidth_flag_parsing() {
        assert!(matches!(parse_bandwidth("auto"), Ok(BandwidthFlag::Auto)));
        assert!(matches!(parse_bandwidth("0.5"), Ok(BandwidthFlag::Fixed(h)) if h == 0.5));
        assert!(parse_bandwidth("0").is_err());
        assert!(parse_bandwidth("-1").is_err());
        assert!(parse_bandwidth("inf").is_err());
    }

    fn simulate(args: &[&str]) -> CliResult<SimulateSettings> {
        let mut argv = vec!["npchange", "simulate", "--out-dir", "o"];
        argv.extend_from_slice(args);
        match Cli::try_parse_from(argv).unwrap().command {
            Command::Simulate(a) => a.settings(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn simulate_defaults_are_materialized() {
        let s = simulate(&["--mode", "pdc"]).unwrap();
        assert_eq!(s.n, vec![500]);
        assert_eq!(s.bandwidth, Some(1.0));
        assert_eq!(s.permutation.unwrap().permutations, 200);
        assert_eq!(s.omega, None);
        let s = simulate(&["--mode", "scaling-probe"]).unwrap();
        assert_eq!(s.n, vec![200, 500, 1000, 2000]);
        assert_eq!((s.bandwidth, s.omega), (None, Some(0.2)));
        let s = simulate(&["--mode", "bias", "--N", "7", "--method", "nwss,nwsup,nwss"]).unwrap();
        assert_eq!(s.replications, 7);
        assert_eq!(s.methods, vec![Method::Nwss, Method::Nwsup]);
    }

    #[test]
    fn invalid_simulate_combinations_name_the_flag() {
        let cases: [(&[&str], &str); 6] = [
            (&["--mode", "bias", "--delta-phi", "0.3"], "--delta-phi"),
            (&["--mode", "bias", "--permutations", "10"], "--permutations"),
            (&["--mode", "pdc", "--omega", "0.3"], "--omega"),
            (&["--mode", "scaling-probe", "--bandwidth", "1"], "--bandwidth"),
            (&["--mode", "pdc", "--theta", "1.5"], "--theta"),
            (&["--mode", "pdc", "--level", "1"], "--level"),
        ];
        for (args, flag) in cases {
            let err = simulate(args).unwrap_err();
            assert!(err.to_string().contains(flag), "{args:?}: {err}");
            assert_eq!(err.exit_code(), crate::error::exit::CONFIG);
        }
    }
}
