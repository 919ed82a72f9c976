//! Fully resolved run settings and the manifest that records them.

use std::fs;
use std::path::Path;

use npchange::{ChangeModel, DetectionConfig, DgpFamily, GridSpec, KernelSpec, Method, PermutationPolicy};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::input::{InputDigest, InputSpec};

pub const TOOL: &str = "npchange";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthSetting {
    Fixed(f64),
    /// Maximise `h · max_t W(t)` over this many candidates.
    Auto { candidates: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSettings {
    pub grid_m: usize,
    pub grid_lo_pct: f64,
    pub grid_hi_pct: f64,
    pub trim: f64,
    pub kernel: KernelSpec,
}

impl ScanSettings {
    pub fn detection_config(&self, bandwidth: f64, method: Method) -> DetectionConfig {
        let (estimator, aggregation) = method.parts();
        DetectionConfig {
            bandwidth,
            kernel: self.kernel,
            grid: GridSpec::Percentile {
                m: self.grid_m,
                lo_pct: self.grid_lo_pct,
                hi_pct: self.grid_hi_pct,
            },
            trim_fraction: self.trim,
            aggregation,
            estimator,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermutationSettings {
    pub permutations: usize,
    pub level: f64,
    pub seed: u64,
}

impl PermutationSettings {
    pub fn policy(&self) -> PermutationPolicy {
        PermutationPolicy {
            n_permutations: self.permutations,
            quantile_level: self.level,
            rng_seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectSettings {
    pub input: InputSpec,
    pub method: Method,
    pub bandwidth: BandwidthSetting,
    pub scan: ScanSettings,
    pub permutation: PermutationSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSettings {
    pub input: InputSpec,
    pub method: Method,
    pub bandwidth: BandwidthSetting,
    pub scan: ScanSettings,
    pub permutation: PermutationSettings,
    pub min_segment: usize,
    pub rebandwidth_per_segment: bool,
    /// Candidates for per-segment re-selection.
    pub segment_candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthSettings {
    pub input: InputSpec,
    pub method: Method,
    pub candidates: usize,
    pub scan: ScanSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimulationMode {
    Bias,
    Pdc,
    ScalingProbe,
}

impl SimulationMode {
    pub fn name(self) -> &'static str {
        match self {
            SimulationMode::Bias => "bias",
            SimulationMode::Pdc => "pdc",
            SimulationMode::ScalingProbe => "scaling-probe",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSettings {
    pub mode: SimulationMode,
    pub dgp: DgpFamily,
    pub model: ChangeModel,
    pub theta: f64,
    pub n: Vec<usize>,
    pub methods: Vec<Method>,
    pub replications: usize,
    /// Fixed bandwidth; absent in the scaling probe, which uses `n^{-ω}`.
    pub bandwidth: Option<f64>,
    pub omega: Option<f64>,
    pub scan: ScanSettings,
    /// Present only in PDC mode.
    pub permutation: Option<PermutationSettings>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSettings {
    pub dgp: DgpFamily,
    pub model: ChangeModel,
    pub theta: f64,
    pub n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "config", rename_all = "snake_case")]
pub enum RunSettings {
    Detect(DetectSettings),
    Segment(SegmentSettings),
    Bandwidth(BandwidthSettings),
    Simulate(SimulateSettings),
    Gen(GenSettings),
}

impl RunSettings {
    pub fn seed(&self) -> Option<u64> {
        match self {
            RunSettings::Detect(s) => Some(s.permutation.seed),
            RunSettings::Segment(s) => Some(s.permutation.seed),
            RunSettings::Bandwidth(_) => None,
            RunSettings::Simulate(s) => Some(s.seed),
            RunSettings::Gen(s) => Some(s.seed),
        }
    }

    pub fn input(&self) -> Option<&InputSpec> {
        match self {
            RunSettings::Detect(s) => Some(&s.input),
            RunSettings::Segment(s) => Some(&s.input),
            RunSettings::Bandwidth(s) => Some(&s.input),
            RunSettings::Simulate(_) | RunSettings::Gen(_) => None,
        }
    }
}

/// Everything needed to reproduce a run. Output location and worker count
/// are deliberately absent: neither affects results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub run: RunSettings,
    pub seed: Option<u64>,
    pub input: Option<InputDigest>,
}

impl Manifest {
    pub fn new(run: RunSettings, input: Option<InputDigest>) -> Self {
        Self {
            tool: TOOL.to_string(),
            version: npchange::VERSION.to_string(),
            seed: run.seed(),
            run,
            input,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        text
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let manifest: Manifest = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: not a valid manifest: {e}", path.display())))?;
        if manifest.tool != TOOL {
            return Err(CliError::config(format!(
                "{}: manifest was written by '{}', not {TOOL}",
                path.display(),
                manifest.tool
            )));
        }
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips() {
        let run = RunSettings::Simulate(SimulateSettings {
            mode: SimulationMode::Pdc,
            dgp: DgpFamily::Arfima,
            model: ChangeModel::M42 { delta_phi: 0.5 },
            theta: 0.4,
            n: vec![500],
            methods: vec![Method::Nwss, Method::Llsup],
            replications: 200,
            bandwidth: Some(1.0),
            omega: None,
            scan: ScanSettings {
                grid_m: 100,
                grid_lo_pct: 5.0,
                grid_hi_pct: 95.0,
                trim: 0.05,
                kernel: KernelSpec::Epanechnikov,
            },
            permutation: Some(PermutationSettings {
                permutations: 200,
                level: 0.99,
                seed: 9,
            }),
            seed: 9,
        });
        let m = Manifest::new(run, None);
        let text = m.to_json();
        let back: Manifest = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json(), text);
        assert!(text.contains("\"command\": \"simulate\""));
    }
}
