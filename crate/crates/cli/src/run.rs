//! Command execution: compute, then write every artifact.

use std::path::{Path, PathBuf};

use npchange::dgp::simulate_pair;
use npchange::export::{write_bandwidth_search, write_one_column, write_profile, write_two_column};
use npchange::segmentation::{binary_segmentation_with, SegmentationOptions};
use npchange::threshold::detect_with_diagnostics;
use npchange::{
    run_bias_experiment, run_pdc_experiment, select_bandwidth, theorem_scaling_probe, BandwidthSearch,
    ChangeModel, ChangeModelSpec, DgpFamily, ExperimentReport, ExperimentSpec, Method, PairedSeries,
    SegmentDecision,
};
use serde::Serialize;

use crate::args::{Cli, Resolved};
use crate::error::{CliError, CliResult};
use crate::input::{read_series, sha256_hex, InputDigest, SeriesFile};
use crate::manifest::{
    BandwidthSetting, BandwidthSettings, DetectSettings, GenSettings, Manifest, RunSettings, ScanSettings,
    SegmentSettings, SimulateSettings, SimulationMode, MANIFEST_FILE,
};
use crate::output::{sig, sig_opt, table, OutDir};

/// Runs the command and returns its human-readable summary.
pub fn execute(cli: &Cli) -> CliResult<String> {
    let (settings, out_dir, expected) = match cli.command.resolve()? {
        Resolved::Run { settings, out_dir } => (settings, out_dir, None),
        Resolved::Rerun { manifest, out_dir } => {
            let m = Manifest::load(&manifest)?;
            if m.version != npchange::VERSION {
                eprintln!(
                    "warning: manifest was written by version {}, running {}",
                    m.version,
                    npchange::VERSION
                );
            }
            (m.run, out_dir, m.input)
        }
    };
    let job = || run(&settings, &out_dir, expected.as_ref());
    match cli.threads {
        None => job(),
        Some(0) => Err(CliError::config("--threads must be at least 1")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::config(format!("cannot start {t} worker threads: {e}")))?
            .install(job),
    }
}

/// Output location plus the manifest every artifact refers to.
struct Context {
    out_dir: PathBuf,
    manifest_json: String,
    manifest_sha256: String,
}

impl Context {
    fn open(&self) -> CliResult<OutDir> {
        let out = OutDir::create(&self.out_dir)?;
        out.write_text(MANIFEST_FILE, &self.manifest_json)?;
        Ok(out)
    }
}

fn run(settings: &RunSettings, out_dir: &Path, expected: Option<&InputDigest>) -> CliResult<String> {
    let file = settings.input().map(read_series).transpose()?;
    if let (Some(expected), Some(file)) = (expected, &file) {
        if *expected != file.digest {
            return Err(CliError::schema(format!(
                "input {} does not match the manifest: expected sha256 {} ({} rows), found {} ({} rows)",
                settings.input().map_or("", |i| i.path.as_str()),
                expected.sha256,
                expected.rows,
                file.digest.sha256,
                file.digest.rows
            )));
        }
    }
    let manifest = Manifest::new(settings.clone(), file.as_ref().map(|f| f.digest.clone()));
    let manifest_json = manifest.to_json();
    let ctx = Context {
        out_dir: out_dir.to_path_buf(),
        manifest_sha256: sha256_hex(manifest_json.as_bytes()),
        manifest_json,
    };
    match (settings, file) {
        (RunSettings::Detect(s), Some(f)) => detect(s, &f, &ctx),
        (RunSettings::Segment(s), Some(f)) => segment(s, &f, &ctx),
        (RunSettings::Bandwidth(s), Some(f)) => bandwidth(s, &f, &ctx),
        (RunSettings::Simulate(s), None) => simulate(s, &ctx),
        (RunSettings::Gen(s), None) => generate(s, &ctx),
        _ => unreachable!("input presence follows the command"),
    }
}

fn resolve_bandwidth(
    setting: BandwidthSetting,
    series: &PairedSeries,
    scan: &ScanSettings,
    method: Method,
) -> CliResult<(f64, Option<BandwidthSearch>)> {
    match setting {
        BandwidthSetting::Fixed(h) => Ok((h, None)),
        BandwidthSetting::Auto { candidates } => {
            let template = scan.detection_config(npchange::cusum::DEFAULT_BANDWIDTH, method);
            let search = select_bandwidth(series, &template, candidates)?;
            Ok((search.h_star, Some(search)))
        }
    }
}

fn labelled(t: usize, file: &SeriesFile) -> String {
    match file.label(t) {
        Some(l) => format!("{t} ({l})"),
        None => t.to_string(),
    }
}

#[derive(Serialize)]
struct DetectRecord<'a> {
    record: &'a str,
    n: usize,
    method: Method,
    bandwidth: f64,
    change_detected: bool,
    k_hat: Option<usize>,
    k_hat_label: Option<String>,
    argmax: usize,
    max_stat: f64,
    threshold: f64,
    permutations: usize,
    level: f64,
    seed: u64,
    manifest_sha256: &'a str,
}

fn detect(s: &DetectSettings, file: &SeriesFile, ctx: &Context) -> CliResult<String> {
    let series = &file.series;
    let (h, search) = resolve_bandwidth(s.bandwidth, series, &s.scan, s.method)?;
    let cfg = s.scan.detection_config(h, s.method);
    let report = detect_with_diagnostics(series, &cfg, &s.permutation.policy())?;
    let o = report.outcome;
    let record = DetectRecord {
        record: "detect",
        n: series.len(),
        method: s.method,
        bandwidth: h,
        change_detected: o.change_detected,
        k_hat: o.k_hat,
        k_hat_label: o.k_hat.and_then(|k| file.label(k)),
        argmax: report.argmax,
        max_stat: o.max_stat,
        threshold: o.threshold,
        permutations: s.permutation.permutations,
        level: s.permutation.level,
        seed: s.permutation.seed,
        manifest_sha256: &ctx.manifest_sha256,
    };

    let mut human = format!(
        "detect: n = {}, method {}, bandwidth {}{}\n",
        series.len(),
        s.method,
        sig(h),
        if search.is_some() { " (auto)" } else { "" }
    );
    match o.k_hat {
        Some(k) => human.push_str(&format!("change detected at t = {}\n", labelled(k, file))),
        None => human.push_str("no change detected\n"),
    }
    human.push_str(&format!(
        "max W = {}, threshold = {} (level {}, {} permutations)\n",
        sig(o.max_stat),
        sig(o.threshold),
        s.permutation.level,
        s.permutation.permutations
    ));

    let out = ctx.open()?;
    out.write_jsonl("summary.jsonl", &[record])?;
    out.write_with("profile.tsv", |w| write_profile(w, &report.profile))?;
    out.write_with("permutation_maxima.tsv", |w| {
        write_one_column(w, "max_W", &report.permutation_maxima)
    })?;
    if let Some(search) = &search {
        out.write_with("bandwidth.tsv", |w| write_bandwidth_search(w, search))?;
    }
    out.write_text("summary.txt", &human)?;
    Ok(human)
}

#[derive(Serialize)]
struct SegmentNodeRecord<'a> {
    record: &'a str,
    start: usize,
    end: usize,
    depth: usize,
    decision: SegmentDecision,
    k_hat: Option<usize>,
    k_hat_label: Option<String>,
    max_stat: Option<f64>,
    threshold: Option<f64>,
    bandwidth: Option<f64>,
    profile: Option<String>,
}

#[derive(Serialize)]
struct SegmentationRecord<'a> {
    record: &'a str,
    n: usize,
    method: Method,
    bandwidth: f64,
    change_points: &'a [usize],
    change_point_labels: Option<Vec<String>>,
    segments: usize,
    tree_depth: usize,
    seed: u64,
    manifest_sha256: &'a str,
}

fn write_json_line<T: Serialize>(w: &mut impl std::io::Write, record: &T) -> std::io::Result<()> {
    serde_json::to_writer(&mut *w, record).map_err(std::io::Error::other)?;
    w.write_all(b"\n")
}

fn na<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

fn profile_file(start: usize, end: usize) -> String {
    format!("profiles/segment_{start}_{end}.tsv")
}

fn segment(s: &SegmentSettings, file: &SeriesFile, ctx: &Context) -> CliResult<String> {
    let series = &file.series;
    let (h, search) = resolve_bandwidth(s.bandwidth, series, &s.scan, s.method)?;
    let cfg = s.scan.detection_config(h, s.method);
    let options = SegmentationOptions {
        min_segment: s.min_segment,
        rebandwidth: s.rebandwidth_per_segment,
        bandwidth_candidates: s.segment_candidates,
    };
    let result = binary_segmentation_with(series, &cfg, &s.permutation.policy(), options)?;

    let nodes: Vec<SegmentNodeRecord> = result
        .nodes
        .iter()
        .map(|r| SegmentNodeRecord {
            record: "segment",
            start: r.start,
            end: r.end,
            depth: r.depth,
            decision: r.decision,
            k_hat: r.k_hat,
            k_hat_label: r.k_hat.and_then(|k| file.label(k)),
            max_stat: r.max_stat,
            threshold: r.threshold,
            bandwidth: r.bandwidth,
            profile: r.profile.as_ref().map(|_| profile_file(r.start, r.end)),
        })
        .collect();
    let leaves = result.segments();
    let summary = SegmentationRecord {
        record: "segmentation",
        n: series.len(),
        method: s.method,
        bandwidth: h,
        change_points: &result.change_points,
        change_point_labels: file
            .labels
            .as_ref()
            .map(|_| result.change_points.iter().filter_map(|&k| file.label(k)).collect()),
        segments: leaves.len(),
        tree_depth: result.tree_depth,
        seed: s.permutation.seed,
        manifest_sha256: &ctx.manifest_sha256,
    };

    let mut human = format!(
        "segment: n = {}, method {}, bandwidth {}{}{}\n",
        series.len(),
        s.method,
        sig(h),
        if search.is_some() { " (auto)" } else { "" },
        if s.rebandwidth_per_segment { ", re-selected per segment" } else { "" }
    );
    human.push_str(&format!(
        "{} change point(s), {} segment(s)\n",
        result.change_points.len(),
        leaves.len()
    ));
    for &k in &result.change_points {
        human.push_str(&format!("  t = {}\n", labelled(k, file)));
    }
    let rows: Vec<Vec<String>> = result
        .nodes
        .iter()
        .map(|r| {
            vec![
                r.start.to_string(),
                r.end.to_string(),
                r.depth.to_string(),
                format!("{:?}", r.decision),
                r.k_hat.map_or_else(|| "-".to_string(), |k| k.to_string()),
                sig_opt(r.max_stat),
                sig_opt(r.threshold),
                sig_opt(r.bandwidth),
            ]
        })
        .collect();
    human.push('\n');
    human.push_str(&table(
        &["start", "end", "depth", "decision", "k_hat", "max_W", "threshold", "h"],
        &rows,
    ));

    let out = ctx.open()?;
    out.write_with("summary.jsonl", |w| {
        for node in &nodes {
            write_json_line(w, node)?;
        }
        write_json_line(w, &summary)
    })?;
    out.write_with("segments.tsv", |w| {
        use std::io::Write;
        let labels = file.labels.is_some();
        write!(w, "# start\tend\tlength\tdecision\tmax_stat\tthreshold\tbandwidth")?;
        if labels {
            write!(w, "\tstart_label\tend_label")?;
        }
        writeln!(w)?;
        for r in &leaves {
            let decision = serde_json::to_value(r.decision).expect("decision serializes");
            write!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.start,
                r.end,
                r.len(),
                decision.as_str().unwrap_or(""),
                na(r.max_stat),
                na(r.threshold),
                na(r.bandwidth)
            )?;
            if labels {
                write!(w, "\t{}\t{}", na(file.label(r.start)), na(file.label(r.end)))?;
            }
            writeln!(w)?;
        }
        Ok(())
    })?;
    for r in &result.nodes {
        if let Some(p) = &r.profile {
            let offset = r.start - 1;
            out.write_with(&profile_file(r.start, r.end), |w| {
                write_two_column(w, ("t", "W"), p.iter().map(|(t, v)| (t + offset, v)))
            })?;
        }
    }
    if let Some(search) = &search {
        out.write_with("bandwidth.tsv", |w| write_bandwidth_search(w, search))?;
    }
    out.write_text("summary.txt", &human)?;
    Ok(human)
}

#[derive(Serialize)]
struct BandwidthRecord<'a> {
    record: &'a str,
    n: usize,
    method: Method,
    candidates: usize,
    h_star: f64,
    f_star: f64,
    manifest_sha256: &'a str,
}

fn bandwidth(s: &BandwidthSettings, file: &SeriesFile, ctx: &Context) -> CliResult<String> {
    let series = &file.series;
    let template = s.scan.detection_config(npchange::cusum::DEFAULT_BANDWIDTH, s.method);
    let search = select_bandwidth(series, &template, s.candidates)?;
    let record = BandwidthRecord {
        record: "bandwidth",
        n: series.len(),
        method: s.method,
        candidates: s.candidates,
        h_star: search.h_star,
        f_star: search.f_values[search.argmax()],
        manifest_sha256: &ctx.manifest_sha256,
    };
    let human = format!(
        "bandwidth: n = {}, method {}, {} candidates in [{}, {}]\nh* = {}, F(h*) = {}\n",
        series.len(),
        s.method,
        s.candidates,
        sig(search.h_grid[0]),
        sig(*search.h_grid.last().expect("at least two candidates")),
        sig(record.h_star),
        sig(record.f_star)
    );
    let out = ctx.open()?;
    out.write_jsonl("summary.jsonl", &[record])?;
    out.write_with("bandwidth.tsv", |w| write_bandwidth_search(w, &search))?;
    out.write_text("summary.txt", &human)?;
    Ok(human)
}

fn model_name(model: &ChangeModel) -> (&'static str, Option<f64>) {
    match *model {
        ChangeModel::M41 => ("m41", None),
        ChangeModel::M42 { delta_phi } => ("m42", Some(delta_phi)),
    }
}

#[derive(Serialize)]
struct CellRecord<'a> {
    record: &'a str,
    dgp: DgpFamily,
    model: &'a str,
    delta_phi: Option<f64>,
    theta: f64,
    n: usize,
    k: usize,
    method: Method,
    bandwidth: f64,
    replications: usize,
    n_estimates: usize,
    bias: Option<f64>,
    bias_sd: Option<f64>,
    abias: Option<f64>,
    abias_sd: Option<f64>,
    pdc: f64,
    seed: u64,
    manifest_sha256: &'a str,
}

#[derive(Serialize)]
struct ScalingRecord<'a> {
    record: &'a str,
    dgp: DgpFamily,
    model: &'a str,
    delta_phi: Option<f64>,
    theta: f64,
    n: usize,
    method: Method,
    bandwidth: f64,
    omega: f64,
    replications: usize,
    mean_max_stat: f64,
    normalizer: f64,
    ratio: f64,
    seed: u64,
    manifest_sha256: &'a str,
}

fn cell_spec(s: &SimulateSettings, n: usize, method: Method, h: f64) -> ExperimentSpec {
    let model = ChangeModelSpec {
        model: s.model,
        theta: s.theta,
    };
    let mut spec = ExperimentSpec::cell(s.dgp, model, n, method)
        .with_replications(s.replications)
        .with_seed(s.seed);
    spec.detection = s.scan.detection_config(h, method);
    if let Some(p) = &s.permutation {
        spec = spec.with_policy(p.policy());
    }
    spec
}

fn write_replications(out: &OutDir, name: &str, report: &ExperimentReport) -> CliResult<()> {
    out.write_with(name, |w| {
        use std::io::Write;
        writeln!(w, "# replication\tk_hat\tdeviation\tmax_stat\tthreshold")?;
        for (i, (kh, (m, th))) in report
            .per_replication_khat
            .iter()
            .zip(report.per_replication_max_stat.iter().zip(&report.per_replication_threshold))
            .enumerate()
        {
            let dev = kh.map(|k| k as i64 - report.k as i64);
            writeln!(w, "{i}\t{}\t{}\t{m}\t{}", na(*kh), na(dev), na(*th))?;
        }
        Ok(())
    })
}

fn simulate(s: &SimulateSettings, ctx: &Context) -> CliResult<String> {
    let (model, delta_phi) = model_name(&s.model);
    let header = format!(
        "simulate {}: dgp {}, model {}{}, theta {}, N = {}, seed {}\n",
        s.mode.name(),
        s.dgp.name(),
        model,
        delta_phi.map_or_else(String::new, |d| format!(" (delta_phi {d})")),
        s.theta,
        s.replications,
        s.seed
    );

    if s.mode == SimulationMode::ScalingProbe {
        let omega = s.omega.expect("scaling probe has omega");
        let mut records = Vec::new();
        for &method in &s.methods {
            let template = cell_spec(s, s.n[0], method, npchange::cusum::DEFAULT_BANDWIDTH);
            for row in theorem_scaling_probe(&s.n, &template, omega)? {
                records.push(ScalingRecord {
                    record: "scaling",
                    dgp: s.dgp,
                    model,
                    delta_phi,
                    theta: s.theta,
                    n: row.n,
                    method,
                    bandwidth: row.bandwidth,
                    omega,
                    replications: s.replications,
                    mean_max_stat: row.mean_max_stat,
                    normalizer: row.normalizer,
                    ratio: row.ratio,
                    seed: s.seed,
                    manifest_sha256: &ctx.manifest_sha256,
                });
            }
        }
        let rows: Vec<Vec<String>> = records
            .iter()
            .map(|r| {
                vec![
                    r.method.to_string(),
                    r.n.to_string(),
                    sig(r.bandwidth),
                    sig(r.mean_max_stat),
                    sig(r.normalizer),
                    sig(r.ratio),
                ]
            })
            .collect();
        let human = header + &table(&["method", "n", "h", "mean_max_W", "log4n/(nh)", "ratio"], &rows);
        let out = ctx.open()?;
        out.write_jsonl("report.jsonl", &records)?;
        out.write_text("report.txt", &human)?;
        return Ok(human);
    }

    let h = s.bandwidth.expect("bias and pdc modes have a bandwidth");
    let mut cells = Vec::new();
    for &n in &s.n {
        for &method in &s.methods {
            let spec = cell_spec(s, n, method, h);
            let report = match s.mode {
                SimulationMode::Bias => run_bias_experiment(&spec)?,
                _ => run_pdc_experiment(&spec)?,
            };
            cells.push(report);
        }
    }
    let records: Vec<CellRecord> = cells
        .iter()
        .map(|r| CellRecord {
            record: s.mode.name(),
            dgp: s.dgp,
            model,
            delta_phi,
            theta: s.theta,
            n: r.n,
            k: r.k,
            method: r.method,
            bandwidth: h,
            replications: r.replications,
            n_estimates: r.n_estimates,
            bias: r.bias,
            bias_sd: r.bias_sd,
            abias: r.abias,
            abias_sd: r.abias_sd,
            pdc: r.pdc,
            seed: s.seed,
            manifest_sha256: &ctx.manifest_sha256,
        })
        .collect();
    let rows: Vec<Vec<String>> = cells
        .iter()
        .map(|r| {
            vec![
                r.method.to_string(),
                r.n.to_string(),
                r.k.to_string(),
                r.replications.to_string(),
                sig_opt(r.bias),
                sig_opt(r.bias_sd),
                sig_opt(r.abias),
                sig_opt(r.abias_sd),
                sig(r.pdc),
            ]
        })
        .collect();
    let human = header
        + &table(
            &["method", "n", "k", "N", "bias", "bias_sd", "abias", "abias_sd", "pdc"],
            &rows,
        );

    let out = ctx.open()?;
    out.write_jsonl("report.jsonl", &records)?;
    for r in &cells {
        let stem = format!("{}_n{}", r.method, r.n);
        write_replications(&out, &format!("replications_{stem}.tsv"), r)?;
        out.write_with(&format!("deviations_{stem}.tsv"), |w| {
            write_one_column(w, "k_hat_minus_k", r.deviations())
        })?;
    }
    out.write_text("report.txt", &human)?;
    Ok(human)
}

#[derive(Serialize)]
struct GenRecord<'a> {
    record: &'a str,
    dgp: DgpFamily,
    model: &'a str,
    delta_phi: Option<f64>,
    theta: f64,
    n: usize,
    k: usize,
    seed: u64,
    series_sha256: String,
    manifest_sha256: &'a str,
}

fn generate(s: &GenSettings, ctx: &Context) -> CliResult<String> {
    let model = ChangeModelSpec {
        model: s.model,
        theta: s.theta,
    };
    let series = simulate_pair(s.dgp.regressor(), s.dgp.noise(), &model, s.n, s.seed)?;
    let mut csv = String::from("t,x,y\n");
    for (t, (x, y)) in series.x().iter().zip(series.y()).enumerate() {
        csv.push_str(&format!("{},{x},{y}\n", t + 1));
    }
    let (name, delta_phi) = model_name(&s.model);
    let k = model.change_index(s.n);
    let record = GenRecord {
        record: "gen",
        dgp: s.dgp,
        model: name,
        delta_phi,
        theta: s.theta,
        n: s.n,
        k,
        seed: s.seed,
        series_sha256: sha256_hex(csv.as_bytes()),
        manifest_sha256: &ctx.manifest_sha256,
    };
    let human = format!(
        "gen: {} rows, dgp {}, model {}, change after t = {k}{}\n",
        s.n,
        s.dgp.name(),
        name,
        if s.model.has_change() { "" } else { " (no change: delta_phi = 0)" }
    );
    let out = ctx.open()?;
    out.write_text("series.csv", &csv)?;
    out.write_jsonl("summary.jsonl", &[record])?;
    Ok(human)
}
