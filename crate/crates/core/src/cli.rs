//! The `pose-confidence` command line.
//!
//! Subcommands: `synth`, `train`, `score`, `eval`, `rerank`. Exit status is
//! 0 on success, 1 on a data or model error (reported on stderr as
//! `error[Kind]: message`) and 2 on a usage error.
//!
//! Every run writes a manifest next to its outputs: `<file>.manifest.json`
//! for single-file outputs, `manifest.json` inside output directories.

use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::coverage::CoverageParams;
use crate::dataset::{build_extended, parse_records, query_ids, record_to_json, write_records, PoseRecord, SplitSpec};
use crate::error::{Error, Result};
use crate::evaluation::{
    ablation, accuracy_table, auc_outcome, pr_curve_from, prepare, standard_ablation_subsets, threshold_sweep,
    train_on, AucOutcome, EvalSet, SweepRow,
};
use crate::features::FeatureSet;
use crate::model::{ConfidenceModel, Init, TrainConfig};
use crate::pose::ErrorThreshold;
use crate::report::{self, Series};
use crate::synth::{synth_generate, SynthConfig};

#[derive(Debug, Parser)]
#[command(name = "pose-confidence", version, about = "Confidence scores for estimated camera poses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate seeded synthetic records
    Synth(SynthArgs),
    /// Train a confidence model on labelled records
    Train(TrainArgs),
    /// Add a `confidence` field to every record
    Score(ScoreArgs),
    /// Precision-recall evaluation against the inlier-count baseline
    Eval(EvalArgs),
    /// Per-query candidate selection and localization accuracy
    Rerank(RerankArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 200)]
    pub queries: usize,
    #[arg(long, default_value_t = 10)]
    pub candidates: u32,
    #[arg(long, default_value_t = 640)]
    pub width: u32,
    #[arg(long, default_value_t = 480)]
    pub height: u32,
    /// Share of wrong candidates generated as high-count, low-coverage decoys
    #[arg(long, default_value_t = SynthConfig::default().adversarial_fraction)]
    pub adversarial_fraction: f64,
    /// Share of candidates with fewer than three correspondences
    #[arg(long, default_value_t = SynthConfig::default().failed_fraction)]
    pub failed_fraction: f64,
    /// Also emit a pose-verification score
    #[arg(long)]
    pub pv: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitArg {
    Zero,
    Random,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    /// Record file (JSON Lines) with ground-truth poses
    #[arg(long)]
    pub records: PathBuf,
    /// Model file to write
    #[arg(long)]
    pub out: PathBuf,
    /// Held-out records; defaults to `<out stem>.test.jsonl`
    #[arg(long)]
    pub test_out: Option<PathBuf>,
    /// Training records; defaults to `<out stem>.train.jsonl`
    #[arg(long)]
    pub train_out: Option<PathBuf>,
    /// Translation bound of a correct pose, meters
    #[arg(long, default_value_t = 1.0)]
    pub threshold_m: f64,
    /// Rotation bound of a correct pose, degrees
    #[arg(long, default_value_t = 10.0)]
    pub threshold_deg: f64,
    /// Fraction of records used for training
    #[arg(long, default_value_t = 0.75)]
    pub split: f64,
    /// Seed of the query split and of random initialization
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated subset of inliers, qcov, dbcov, pv
    #[arg(long, default_value = "inliers,qcov,dbcov", value_parser = FeatureSet::parse_list)]
    #[serde(serialize_with = "ser_display")]
    pub features: FeatureSet,
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_epochs: usize,
    #[arg(long, default_value_t = TrainConfig::default().convergence_tol)]
    pub convergence_tol: f64,
    /// L2 penalty on the weights
    #[arg(long, default_value_t = 0.0)]
    pub l2: f64,
    /// Weight both classes equally
    #[arg(long)]
    pub balance_classes: bool,
    #[arg(long, value_enum, default_value_t = InitArg::Zero)]
    pub init: InitArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScoreArgs {
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    /// Records to evaluate, typically the held-out file written by `train`
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// `meters,degrees` pairs separated by `;`, e.g. "1.5,10;1.0,10";
    /// defaults to the model's training threshold
    #[arg(long, value_parser = parse_thresholds)]
    pub thresholds: Option<ThresholdList>,
    /// Keep only the max-inlier candidate of each query
    #[arg(long)]
    pub best_only: bool,
    /// Retrain on every leave-one-out feature subset (needs --train-records)
    #[arg(long, requires = "train_records")]
    pub ablate: bool,
    #[arg(long)]
    pub train_records: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RerankArgs {
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Comma-separated translation thresholds in meters
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75,1,1.25,1.5,1.75,2")]
    pub thresholds_m: Vec<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub threshold_deg: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn ser_display<S: serde::Serializer, T: std::fmt::Display>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Thresholds given on the command line as `m,deg;m,deg;...`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdList(pub Vec<ErrorThreshold>);

pub fn parse_thresholds(s: &str) -> std::result::Result<ThresholdList, String> {
    s.split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|pair| {
            let (m, d) = pair.split_once(',').ok_or_else(|| format!("`{pair}` is not `meters,degrees`"))?;
            let m: f64 = m.trim().parse().map_err(|e| format!("`{m}`: {e}"))?;
            let d: f64 = d.trim().parse().map_err(|e| format!("`{d}`: {e}"))?;
            ErrorThreshold::new(m, d).map_err(|e| e.to_string())
        })
        .collect::<std::result::Result<Vec<_>, _>>()
        .and_then(|v| if v.is_empty() { Err("no thresholds given".into()) } else { Ok(ThresholdList(v)) })
}

/// Provenance of one run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub version: &'static str,
    pub config: serde_json::Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seed: Option<u64>,
    pub duration_ms: u64,
}

struct Run {
    subcommand: &'static str,
    config: serde_json::Value,
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    start: Instant,
}

impl Run {
    fn new(subcommand: &'static str, args: &impl Serialize, seed: Option<u64>) -> Self {
        let config = serde_json::to_value(args).expect("arguments serialize");
        Self { subcommand, config, seed, inputs: Vec::new(), outputs: Vec::new(), start: Instant::now() }
    }

    fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        write_file(path, bytes)?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    fn finish(self, manifest_path: &Path) -> Result<()> {
        let manifest = RunManifest {
            subcommand: self.subcommand,
            version: env!("CARGO_PKG_VERSION"),
            config: self.config,
            inputs: self.inputs,
            outputs: self.outputs,
            seed: self.seed,
            duration_ms: self.start.elapsed().as_millis() as u64,
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        write_file(manifest_path, text.as_bytes())
    }
}

fn io_at(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_at(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| io_at(path, e))
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

fn with_stem_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn read_records(path: &Path) -> Result<Vec<PoseRecord>> {
    let file = File::open(path).map_err(|e| io_at(path, e))?;
    parse_records(BufReader::new(file))
}

fn read_model(path: &Path) -> Result<ConfidenceModel> {
    let text = fs::read_to_string(path).map_err(|e| io_at(path, e))?;
    ConfidenceModel::from_json(&text)
}

fn records_bytes(records: &[PoseRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_records(&mut buf, records).expect("writing to memory");
    buf
}

fn json_bytes(value: &impl Serialize) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text.into_bytes()
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn fmt_auc(a: &AucOutcome) -> String {
    match a {
        AucOutcome::Ok { auc } => format!("{auc:.4}"),
        AucOutcome::Degenerate { reason } => format!("undefined ({reason})"),
    }
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let mut run = Run::new("synth", args, Some(args.seed));
    let config = SynthConfig {
        queries: args.queries,
        candidates: args.candidates,
        width: args.width,
        height: args.height,
        failed_fraction: args.failed_fraction,
        adversarial_fraction: args.adversarial_fraction,
        with_pv: args.pv,
        ..SynthConfig::default()
    };
    let records = synth_generate(&config, args.seed)?;
    run.write(&args.out, &records_bytes(&records))?;
    run.finish(&sidecar(&args.out, ".manifest.json"))
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    let mut run = Run::new("train", args, Some(args.seed));
    let threshold = ErrorThreshold::new(args.threshold_m, args.threshold_deg)?;
    let split = SplitSpec::new(args.split, args.seed)?;
    let config = TrainConfig {
        learning_rate: args.learning_rate,
        max_epochs: args.max_epochs,
        convergence_tol: args.convergence_tol,
        l2_penalty: args.l2,
        balance_classes: args.balance_classes,
        init: match args.init {
            InitArg::Zero => Init::Zero,
            InitArg::Random => Init::Random,
        },
        seed: args.seed,
        label_threshold: threshold,
    };
    config.validate()?;

    run.input(&args.records);
    let records = read_records(&args.records)?;
    let params = CoverageParams::default();
    let prepared = prepare(records, &threshold, &split, &params)?;
    let model = train_on(&prepared.train, &prepared.train_labels, &args.features, &config)?;

    let test_out = args.test_out.clone().unwrap_or_else(|| with_stem_suffix(&args.out, ".test.jsonl"));
    let train_out = args.train_out.clone().unwrap_or_else(|| with_stem_suffix(&args.out, ".train.jsonl"));
    let mut model_json = model.to_json();
    model_json.push('\n');
    run.write(&args.out, model_json.as_bytes())?;
    run.write(&train_out, &records_bytes(&prepared.train.records))?;
    run.write(&test_out, &records_bytes(&prepared.test.records))?;
    run.finish(&sidecar(&args.out, ".manifest.json"))?;

    let ours = auc_outcome(&prepared.test.confidences(&model)?, &prepared.test_labels)?;
    let base = auc_outcome(&prepared.test.inlier_scores(), &prepared.test_labels)?;
    println!(
        "trained on {} records ({} queries), {} epochs, loss {:.6}",
        prepared.train.len(),
        query_ids(&prepared.train.records).len(),
        model.training_meta.epochs,
        model.training_meta.final_loss
    );
    println!(
        "held out {} records ({} queries): AUC {} vs inliers {}",
        prepared.test.len(),
        query_ids(&prepared.test.records).len(),
        fmt_auc(&ours),
        fmt_auc(&base)
    );
    Ok(())
}

pub fn cmd_score(args: &ScoreArgs) -> Result<()> {
    let mut run = Run::new("score", args, None);
    run.input(&args.records);
    run.input(&args.model);
    let model = read_model(&args.model)?;
    let records = read_records(&args.records)?;
    let set = EvalSet::new(records, &CoverageParams::default());
    let confidences = set.confidences(&model)?;
    let mut out = Vec::new();
    for (r, c) in set.records.iter().zip(&confidences) {
        writeln!(out, "{}", record_to_json(r, Some(*c)))?;
    }
    run.write(&args.out, &out)?;
    run.finish(&sidecar(&args.out, ".manifest.json"))
}

#[derive(Serialize)]
struct EvalReport<'a> {
    records: usize,
    queries: usize,
    best_only: bool,
    features: String,
    model_threshold: ErrorThreshold,
    thresholds: &'a [SweepRow],
    #[serde(skip_serializing_if = "Option::is_none")]
    ablation: Option<&'a [crate::evaluation::AblationRow]>,
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let mut run = Run::new("eval", args, None);
    run.input(&args.records);
    run.input(&args.model);
    let model = read_model(&args.model)?;
    let params = CoverageParams::default();
    let mut set = EvalSet::new(build_extended(read_records(&args.records)?), &params);
    if args.best_only {
        set = set.best_candidates();
    }
    let model_threshold = model.training_meta.threshold;
    let thresholds = args.thresholds.clone().map_or_else(|| vec![model_threshold], |l| l.0);
    let rows = threshold_sweep(&set, &model, &thresholds)?;

    let dir = &args.out_dir;
    let confidences = set.confidences(&model)?;
    let inliers = set.inlier_scores();
    for (i, row) in rows.iter().enumerate() {
        for (name, auc) in [("model", &row.model), ("inliers", &row.inliers)] {
            if let AucOutcome::Degenerate { reason } = auc {
                eprintln!("warning: {name} AUC at {} undefined: {reason}", row.threshold);
            }
        }
        if row.model.value().is_none() {
            continue;
        }
        let labels = set.labels(&row.threshold)?;
        let ours = pr_curve_from(&confidences, &labels)?;
        let base = pr_curve_from(&inliers, &labels)?;
        run.write(&dir.join(format!("pr_{i}_model.csv")), &csv_bytes(|b| report::write_pr_csv(b, &ours))?)?;
        run.write(&dir.join(format!("pr_{i}_inliers.csv")), &csv_bytes(|b| report::write_pr_csv(b, &base))?)?;
        let title = format!("Precision-recall at {}", row.threshold);
        let svg = report::pr_plot_svg(
            &title,
            &[
                Series::new(format!("confidence (AUC {:.3})", ours.auc), ours.points),
                Series::new(format!("inliers (AUC {:.3})", base.auc), base.points),
            ],
        );
        run.write(&dir.join(format!("pr_{i}.svg")), svg.as_bytes())?;
    }
    run.write(&dir.join("sweep.csv"), &csv_bytes(|b| report::write_sweep_csv(b, &rows))?)?;

    let ablation_rows = match (&args.ablate, &args.train_records) {
        (true, Some(train_path)) => {
            run.input(train_path);
            let train = EvalSet::new(build_extended(read_records(train_path)?), &params);
            let train_labels = train.labels(&model_threshold)?;
            let test_labels = set.labels(&model_threshold)?;
            let subsets = standard_ablation_subsets(&model.feature_set);
            let config = model.training_meta.config();
            let rows = ablation(&train, &train_labels, &set, &test_labels, &subsets, &config)?;
            run.write(&dir.join("ablation.csv"), &csv_bytes(|b| report::write_ablation_csv(b, &rows))?)?;
            Some(rows)
        }
        _ => None,
    };

    let report = EvalReport {
        records: set.len(),
        queries: query_ids(&set.records).len(),
        best_only: args.best_only,
        features: model.feature_set.label(),
        model_threshold,
        thresholds: &rows,
        ablation: ablation_rows.as_deref(),
    };
    run.write(&dir.join("report.json"), &json_bytes(&report))?;
    run.finish(&dir.join("manifest.json"))?;

    for row in &rows {
        println!("{}: AUC {} vs inliers {}", row.threshold, fmt_auc(&row.model), fmt_auc(&row.inliers));
    }
    for row in ablation_rows.iter().flatten() {
        println!("ablation {}: AUC {}", row.features.label(), fmt_auc(&row.auc));
    }
    Ok(())
}

pub fn cmd_rerank(args: &RerankArgs) -> Result<()> {
    let mut run = Run::new("rerank", args, None);
    run.input(&args.records);
    run.input(&args.model);
    let thresholds =
        args.thresholds_m.iter().map(|&m| ErrorThreshold::new(m, args.threshold_deg)).collect::<Result<Vec<_>>>()?;
    if thresholds.is_empty() {
        return Err(Error::InvalidThreshold("no thresholds given".into()));
    }
    let model = read_model(&args.model)?;
    let records = read_records(&args.records)?;
    if let Some(r) = records.iter().find(|r| r.ground_truth_pose.is_none()) {
        return Err(r.missing_ground_truth());
    }
    let set = EvalSet::new(records, &CoverageParams::default());
    let confidences = set.confidences(&model)?;
    let model_pick = set.select_by(&confidences);
    let inlier_pick = set.select_max_inliers();
    let rows = accuracy_table(&set, &model_pick, &inlier_pick, &thresholds)?;

    let mut selections = Vec::new();
    for (&m, &b) in model_pick.iter().zip(&inlier_pick) {
        let line = json!({
            "query_id": set.records[m].query_id,
            "model_rank": set.records[m].candidate_rank,
            "model_confidence": confidences[m],
            "inliers_rank": set.records[b].candidate_rank,
            "inliers_count": set.records[b].inlier_count(),
        });
        writeln!(selections, "{line}")?;
    }
    let dir = &args.out_dir;
    run.write(&dir.join("selections.jsonl"), &selections)?;
    run.write(&dir.join("accuracy.csv"), &csv_bytes(|b| report::write_accuracy_csv(b, &rows))?)?;
    run.write(&dir.join("accuracy.svg"), report::accuracy_plot_svg(&rows).as_bytes())?;
    let changed = model_pick.iter().zip(&inlier_pick).filter(|(a, b)| a != b).count();
    let report = json!({ "queries": model_pick.len(), "changed_selections": changed, "accuracy": rows });
    run.write(&dir.join("report.json"), &json_bytes(&report))?;
    run.finish(&dir.join("manifest.json"))?;

    for row in &rows {
        println!("{}: accuracy {:.4} vs inliers {:.4}", row.threshold, row.model, row.inliers);
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => cmd_synth(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Score(a) => cmd_score(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Rerank(a) => cmd_rerank(&a),
    }
}

/// Parses `std::env::args`, runs the subcommand and maps the outcome to an
/// exit status.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = std::io::stdout().flush();
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::from(1)
        }
    }
}
