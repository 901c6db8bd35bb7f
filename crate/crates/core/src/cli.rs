//! Command-line front end.
//!
//! Every command reads its inputs, writes its artifacts into the `--output`
//! directory and records a `manifest.json` with the effective configuration
//! and SHA-256 digests of all inputs and outputs.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bench::{run_comparison, summarize, ComparisonConfig};
use crate::cluster::{choose_k_by_jump, kmeans, pam, KMeansConfig, Partition};
use crate::cwt::SmoothingConfig;
use crate::data::{read_signal_csv, slice_series, FunctionalDataset};
use crate::dissimilarity::{
    build_dissimilarity_matrix, DissimilarityConfig, DissimilarityMatrix, Measure,
};
use crate::dwt::{extract_features, FeatureKind, FeatureMatrix, WaveletFilter};
use crate::error::{Error, Result};
use crate::eval::{
    neighborhood_graph, shadow_values, shadow_values_dissimilarity, ValidationReport,
};
use crate::matrix::Matrix;
use crate::select::{select_features, select_features_stable, write_json, SelectionConfig};
use crate::sim::{gen_benchmark_with, read_labels_csv, BenchmarkConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    /// DWT scale features, selection and k-means.
    Features,
    /// CWT dissimilarities and PAM.
    Spectrum,
}

/// Effective settings of one run; loaded from `--config` and overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub pipeline: Pipeline,
    pub features: FeatureKind,
    /// Only meaningful with the spectrum pipeline.
    pub measure: Option<Measure>,
    pub wavelet: String,
    pub omin: i32,
    pub omax: i32,
    pub voices: u32,
    pub theta: f64,
    pub smoothing: SmoothingConfig,
    pub k: Option<usize>,
    pub kmax: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    /// Segment length for `slice`.
    pub delta: Option<usize>,
    /// Resample curves to `2^resample` points before the DWT.
    pub resample: Option<u32>,
    /// Sampling step of the signal read by `slice`.
    pub step: f64,
    /// Partition CSV read by `diagnose`.
    pub partition: Option<PathBuf>,
    /// True class labels (`id,label`) read by `diagnose`.
    pub labels: Option<PathBuf>,
    pub replicates: usize,
    pub selection: SelectionConfig,
    pub benchmark: BenchmarkConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let d = DissimilarityConfig::default();
        RunConfig {
            pipeline: Pipeline::Features,
            features: FeatureKind::LogitRc,
            measure: None,
            wavelet: "symmlet6".into(),
            omin: d.omin,
            omax: d.omax,
            voices: d.voices,
            theta: d.theta,
            smoothing: d.smoothing,
            k: None,
            kmax: None,
            restarts: KMeansConfig::default().restarts,
            seed: 0,
            input: None,
            output: None,
            delta: None,
            resample: None,
            step: 1.0,
            partition: None,
            labels: None,
            replicates: 100,
            selection: SelectionConfig::default(),
            benchmark: BenchmarkConfig::default(),
        }
    }
}

impl RunConfig {
    /// Checks that the settings are mutually consistent.
    pub fn validate(&self) -> Result<()> {
        if self.measure.is_some() && self.pipeline != Pipeline::Spectrum {
            return Err(Error::config(
                "measure",
                "a measure is only valid with pipeline = spectrum",
            ));
        }
        if let Some(m) = self.measure {
            if !m.is_spectral() {
                return Err(Error::config(
                    "measure",
                    format!("'{m}' is not a spectrum measure; use wer or mca"),
                ));
            }
        }
        WaveletFilter::by_name(&self.wavelet)
            .map_err(|e| Error::config("wavelet", e.to_string()))?;
        if self.omin >= self.omax {
            return Err(Error::config(
                "omin",
                format!("omin ({}) must be below omax ({})", self.omin, self.omax),
            ));
        }
        if self.voices == 0 {
            return Err(Error::config(
                "voices",
                "need at least one voice per octave",
            ));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::config("theta", "must lie in (0, 1]"));
        }
        if self.k == Some(0) {
            return Err(Error::config("k", "must be positive"));
        }
        if matches!(self.kmax, Some(k) if k < 2) {
            return Err(Error::config("kmax", "must be at least 2"));
        }
        if self.restarts == 0 {
            return Err(Error::config("restarts", "must be positive"));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::config("step", "must be positive"));
        }
        if self.replicates == 0 {
            return Err(Error::config("replicates", "must be positive"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn measure(&self) -> Measure {
        self.measure.unwrap_or(Measure::Wer)
    }

    fn dissimilarity(&self) -> DissimilarityConfig {
        DissimilarityConfig {
            omin: self.omin,
            omax: self.omax,
            voices: self.voices,
            theta: self.theta,
            smoothing: self.smoothing.clone(),
            wavelet: self.wavelet.clone(),
            features: self.features,
            ..Default::default()
        }
    }

    fn kmeans(&self) -> KMeansConfig {
        KMeansConfig {
            restarts: self.restarts,
            ..Default::default()
        }
    }

    fn require_input(&self) -> Result<&Path> {
        self.input
            .as_deref()
            .ok_or_else(|| Error::config("input", "this command needs --input"))
    }

    fn require_k(&self) -> Result<usize> {
        self.k
            .ok_or_else(|| Error::config("k", "this command needs --k"))
    }

    fn output_dir(&self) -> Result<&Path> {
        self.output
            .as_deref()
            .ok_or_else(|| Error::config("output", "this command needs --output"))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "wavecluster",
    version,
    about = "Wavelet-based clustering of functional time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Cut a one-column signal into consecutive curves.
    Slice,
    /// DWT scale features (AC or logit-RC) of each curve.
    Features,
    /// Screen and select informative feature columns.
    Select,
    /// Jump method for the number of clusters.
    ChooseK,
    /// k-means on features or PAM on a spectral dissimilarity.
    Cluster,
    /// Pairwise dissimilarity matrix of curves.
    Dissim,
    /// Shadow values, neighborhood graph and external validation.
    Diagnose,
    /// Generate the three-class benchmark dataset.
    Simulate,
    /// Features-versus-raw comparison over benchmark replicates.
    Benchmark,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Slice => "slice",
            Command::Features => "features",
            Command::Select => "select",
            Command::ChooseK => "choose-k",
            Command::Cluster => "cluster",
            Command::Dissim => "dissim",
            Command::Diagnose => "diagnose",
            Command::Simulate => "simulate",
            Command::Benchmark => "benchmark",
        }
    }
}

#[derive(Debug, Default, Args)]
struct Flags {
    /// Input file (signal, dataset, features or dissimilarity CSV).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// JSON run configuration; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// features | spectrum
    #[arg(long, global = true)]
    pipeline: Option<String>,
    /// ac | logit-rc
    #[arg(long, global = true)]
    features: Option<String>,
    /// wer | mca
    #[arg(long, global = true)]
    measure: Option<String>,
    #[arg(long, global = true)]
    wavelet: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    omin: Option<i32>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    omax: Option<i32>,
    #[arg(long, global = true)]
    voices: Option<u32>,
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    kmax: Option<usize>,
    #[arg(long, global = true)]
    restarts: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Segment length in samples (slice).
    #[arg(long, global = true)]
    delta: Option<usize>,
    /// Resample curves to 2^J points before the DWT.
    #[arg(long, global = true)]
    resample: Option<u32>,
    /// Sampling step of the input signal (slice).
    #[arg(long, global = true)]
    step: Option<f64>,
    /// Partition CSV (diagnose).
    #[arg(long, global = true)]
    partition: Option<PathBuf>,
    /// True labels CSV (diagnose).
    #[arg(long, global = true)]
    labels: Option<PathBuf>,
    /// Number of benchmark replicates.
    #[arg(long, global = true)]
    replicates: Option<usize>,
    /// Share of cross-covariance kept by MCA.
    #[arg(long, global = true)]
    theta: Option<f64>,
}

fn parse_field<T: std::str::FromStr<Err = Error>>(field: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|e: Error| Error::config(field, e.to_string()))
}

impl Flags {
    fn apply(&self, mut c: RunConfig) -> Result<RunConfig> {
        if let Some(p) = &self.pipeline {
            c.pipeline = match p.to_ascii_lowercase().as_str() {
                "features" => Pipeline::Features,
                "spectrum" => Pipeline::Spectrum,
                other => {
                    return Err(Error::config(
                        "pipeline",
                        format!("unknown pipeline '{other}'"),
                    ))
                }
            };
        }
        if let Some(f) = &self.features {
            c.features = parse_field("features", f)?;
        }
        if let Some(m) = &self.measure {
            c.measure = Some(parse_field("measure", m)?);
        }
        macro_rules! set {
            ($($name:ident),*) => { $( if let Some(v) = &self.$name { c.$name = v.clone().into(); } )* };
        }
        set!(
            wavelet, omin, omax, voices, k, kmax, restarts, seed, input, output, delta, resample,
            step, partition, labels, replicates, theta
        );
        Ok(c)
    }
}

/// A file entry of the manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Record of one command run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config: RunConfig,
    pub seed: u64,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub versions: std::collections::BTreeMap<String, String>,
    /// Command-specific results (e.g. chosen K, remainder length).
    pub summary: serde_json::Value,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn digest_entry(path: &Path, base: Option<&Path>) -> Result<FileDigest> {
    let shown = base
        .and_then(|b| path.strip_prefix(b).ok())
        .unwrap_or(path)
        .display()
        .to_string();
    Ok(FileDigest {
        path: shown,
        sha256: sha256_file(path)?,
    })
}

struct Outcome {
    outputs: Vec<PathBuf>,
    summary: serde_json::Value,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status. Diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let base = match &cli.flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    let config = cli.flags.apply(base)?;
    config.validate()?;
    let out_dir = config.output_dir()?.to_path_buf();
    std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;

    let work = || dispatch(cli.command, &config, &out_dir);
    let outcome = match cli.flags.threads {
        Some(0) => return Err(Error::config("threads", "must be positive")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config("threads", e.to_string()))?
            .install(work)?,
        None => work()?,
    };

    let mut inputs = Vec::new();
    for p in [
        &cli.flags.config,
        &config.input,
        &config.partition,
        &config.labels,
    ]
    .into_iter()
    .flatten()
    {
        inputs.push(digest_entry(p, None)?);
    }
    let outputs = outcome
        .outputs
        .iter()
        .map(|p| digest_entry(p, Some(&out_dir)))
        .collect::<Result<_>>()?;
    let mut versions = std::collections::BTreeMap::new();
    versions.insert(
        "wavecluster".to_string(),
        env!("CARGO_PKG_VERSION").to_string(),
    );
    let manifest = Manifest {
        command: cli.command.name().to_string(),
        seed: config.seed,
        config,
        inputs,
        outputs,
        versions,
        summary: outcome.summary,
    };
    let text =
        serde_json::to_string_pretty(&manifest).map_err(|e| Error::invalid(e.to_string()))?;
    write_json(&out_dir.join("manifest.json"), &text)
}

fn dispatch(command: Command, c: &RunConfig, out: &Path) -> Result<Outcome> {
    match command {
        Command::Slice => cmd_slice(c, out),
        Command::Features => cmd_features(c, out),
        Command::Select => cmd_select(c, out),
        Command::ChooseK => cmd_choose_k(c, out),
        Command::Cluster => cmd_cluster(c, out),
        Command::Dissim => cmd_dissim(c, out),
        Command::Diagnose => cmd_diagnose(c, out),
        Command::Simulate => cmd_simulate(c, out),
        Command::Benchmark => cmd_benchmark(c, out),
    }
}

fn read_dataset(c: &RunConfig) -> Result<FunctionalDataset> {
    let ds = FunctionalDataset::read_csv(c.require_input()?)?;
    match c.resample {
        Some(j) => ds.resample_dyadic(j),
        None => Ok(ds),
    }
}

fn cmd_slice(c: &RunConfig, out: &Path) -> Result<Outcome> {
    let delta = c
        .delta
        .ok_or_else(|| Error::config("delta", "slice needs --delta"))?;
    let signal = read_signal_csv(c.require_input()?, c.step)?;
    let sliced = slice_series(&signal, delta)?;
    let dataset = match c.resample {
        Some(j) => sliced.dataset.resample_dyadic(j)?,
        None => sliced.dataset,
    };
    let path = out.join("dataset.csv");
    dataset.write_csv(&path)?;
    Ok(Outcome {
        outputs: vec![path],
        summary: serde_json::json!({
            "curves": dataset.n_curves(),
            "curve_length": dataset.curve_len(),
            "remainder": sliced.remainder,
        }),
    })
}

fn cmd_features(c: &RunConfig, out: &Path) -> Result<Outcome> {
    let dataset = read_dataset(c)?;
    let filter = WaveletFilter::by_name(&c.wavelet)?;
    let features = extract_features(&dataset, &filter, c.features)?;
    let path = out.join("features.csv");
    features.write_csv(&path)?;
    Ok(Outcome {
        outputs: vec![path],
        summary: serde_json::json!({ "rows": features.rows(), "columns": features.cols() }),
    })
}

fn cmd_select(c: &RunConfig, out: &Path) -> Result<Outcome> {
    let features = FeatureMatrix::read_csv(c.require_input()?)?;
    let report_path = out.join("selection.json");
    let (selected, summary) = match (c.kmax, c.k) {
        (Some(kmax), _) => {
            let s = select_features_stable(&features, kmax, &c.selection, c.seed)?;
            s.write_json(&report_path)?;
            let summary =
                serde_json::json!({ "selected_scales": s.selected_scales, "support": s.support });
            (s.selected, summary)
        }
        (None, Some(k)) => {
            let r = select_features(&features, k, &c.selection, c.seed)?;
            r.write_json(&report_path)?;
            let summary = serde_json::json!({ "selected_scales": r.selected_scales, "no_structure": r.no_structure });
            (r.selected, summary)
        }
        (None, None) => return Err(Error::config("k", "select needs --k or --kmax")),
    };
    let mut outputs = vec![report_path];
    if !selected.is_empty() {
        let path = out.join("features_selected.csv");
        features.select_columns(&selected).write_csv(&path)?;
        outputs.push(path);
    }
    Ok(Outcome { outputs, summary })
}

/// A feature CSV, or any numeric matrix with one observation per row.
fn read_matrix(path: &Path) -> Result<Matrix> {
    if let Ok(f) = FeatureMatrix::read_csv(path) {
        return Ok(f.matrix().clone());
    }
    let table = crate::csvio::read_numeric_file(path)?;
    Matrix::from_rows(&table.rows).ok_or_else(|| Error::parse(path, "rows differ in length"))
}

fn cmd_choose_k(c: &RunConfig, out: &Path) -> Result<Outcome> {
    let data = read_matrix(c.require_input()?)?;
    let kmax = c
        .kmax
        .ok_or_else(|| Error::config("kmax", "choose-k needs --kmax"))?;
    let r = choose_k_by_jump(&data, kmax, &c.kmeans(), c.seed)?;
    let curve = out.join("distortion.csv");
    r.curve.write_csv(&curve)?;
    let partition = out.join("partition.csv");
    r.best().write_csv(&partition)?;
    Ok(Outcome {
        outputs: vec![curve, partition],
        summary: serde_json::json!({ "k_star": r.k_star, "saturated": r.saturated }),
    })
}

fn cmd_cluster(c: &RunConfig, out: &Path) -> Result<Outcome> {
    let k = c.require_k()?;
    let mut outputs = Vec::new();
    let partition = match c.pipeline {
        Pipeline::Features => {
            let data = read_matrix(c.require_input()?)?;
            kmeans(&data, k, &c.kmeans(), c.seed)?
        }
        Pipeline::Spectrum => {
            let dataset = read_dataset(c)?;
            let diss = build_dissimilarity_matrix(&dataset, c.measure(), &c.dissimilarity())?;
            let path = out.join("dissimilarity.csv");
            diss.write_csv(&path)?;
            outputs.push(path);
            pam(&diss, k, c.seed)?
        }
    };
    let path = out.join("partition.csv");
    partition.write_csv(&path)?;
    outputs.insert(0, path);
    Ok(Outcome {
        outputs,
        summary: serde_json::json!({ "k": partition.k(), "cost": partition.cost(), "sizes": partition.cluster_sizes() }),
    })
}

fn cmd_dissim(c: &RunConfig, out: &Path) -> Result<Outcome> {
    let dataset = read_dataset(c)?;
    let measure = if c.pipeline == Pipeline::Spectrum {
        c.measure()
    } else {
        Measure::EuclidFeatures
    };
    let diss = build_dissimilarity_matrix(&dataset, measure, &c.dissimilarity())?;
    let csv = out.join("dissimilarity.csv");
    diss.write_csv(&csv)?;
    let bin = out.join("dissimilarity.bin");
    diss.write_binary(&bin)?;
    Ok(Outcome {
        outputs: vec![csv, bin],
        summary: serde_json::json!({ "measure": measure.to_string(), "n": diss.len() }),
    })
}

fn cmd_diagnose(c: &RunConfig, out: &Path) -> Result<Outcome> {
    let part_path = c
        .partition
        .as_deref()
        .ok_or_else(|| Error::config("partition", "diagnose needs --partition"))?;
    let partition = Partition::read_csv(part_path)?;
    let input = c.require_input()?;
    let mut outputs = Vec::new();
    let shadows = match c.pipeline {
        Pipeline::Features => {
            let data = read_matrix(input)?;
            let graph = neighborhood_graph(&data, &partition)?;
            let dot = out.join("graph.dot");
            graph.write_dot(&dot)?;
            let csv = out.join("graph.csv");
            graph.write_csv(&csv)?;
            outputs.extend([dot, csv]);
            shadow_values(&data, &partition)?
        }
        Pipeline::Spectrum => {
            let diss = DissimilarityMatrix::read_csv(input)?;
            shadow_values_dissimilarity(&diss, &partition)?
        }
    };
    let shadow_path = out.join("shadow.csv");
    let mut w = crate::csvio::create(&shadow_path)?;
    crate::csvio::write_line(
        &mut w,
        &["id".into(), "label".into(), "shadow".into()],
        &shadow_path,
    )?;
    for (i, s) in shadows.iter().enumerate() {
        crate::csvio::write_line(
            &mut w,
            &[
                i.to_string(),
                partition.labels()[i].to_string(),
                format!("{s}"),
            ],
            &shadow_path,
        )?;
    }
    crate::csvio::finish(w, &shadow_path)?;
    outputs.insert(0, shadow_path);
    let mut summary = serde_json::json!({
        "mean_shadow": shadows.iter().sum::<f64>() / shadows.len() as f64,
    });
    if let Some(labels) = &c.labels {
        let truth = read_labels_csv(labels)?;
        let report = ValidationReport::new(&truth, partition.labels())?;
        let path = out.join("validation.json");
        report.write_json(&path)?;
        outputs.push(path);
        summary["misclassified"] = report.misclassified.into();
        summary["adjusted_rand"] = report.adjusted_rand.into();
    }
    Ok(Outcome { outputs, summary })
}

fn write_benchmark_data(c: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let data = gen_benchmark_with(&c.benchmark, c.seed)?;
    let dataset = out.join("dataset.csv");
    data.dataset.write_csv(&dataset)?;
    let labels = out.join("labels.csv");
    data.write_labels_csv(&labels)?;
    Ok(vec![dataset, labels])
}

fn cmd_simulate(c: &RunConfig, out: &Path) -> Result<Outcome> {
    let outputs = write_benchmark_data(c, out)?;
    Ok(Outcome {
        outputs,
        summary: serde_json::json!({
            "curves": 3 * c.benchmark.per_class,
            "curve_length": c.benchmark.length,
        }),
    })
}

fn cmd_benchmark(c: &RunConfig, out: &Path) -> Result<Outcome> {
    // replicate 0 uses the master seed, so its data matches `simulate`
    let mut outputs = write_benchmark_data(c, out)?;
    let cfg = ComparisonConfig {
        data: c.benchmark.clone(),
        wavelet: c.wavelet.clone(),
        features: c.features,
        k: c.k.unwrap_or(3),
        kmeans: c.kmeans(),
        selection: c.selection,
    };
    let outcomes = run_comparison(&cfg, c.seed, c.replicates)?;
    let summary = summarize(&outcomes)?;
    let path = out.join("benchmark.json");
    let text = serde_json::to_string_pretty(
        &serde_json::json!({ "summary": summary, "replicates": outcomes }),
    )
    .map_err(|e| Error::invalid(e.to_string()))?;
    write_json(&path, &text)?;
    outputs.push(path);
    Ok(Outcome {
        outputs,
        summary: serde_json::to_value(summary).map_err(|e| Error::invalid(e.to_string()))?,
    })
}
