//! Config-driven experiment runner: ingest, clean, engineer, encode, filter,
//! split, scale on train, fit the requested models, evaluate, and emit a
//! deterministic artifact tree.
//!
//! Identical config and inputs produce byte-identical outputs. Model fitting
//! failures are recorded per model and do not abort the run; every other
//! stage error aborts with the stage name.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Deserialize;

use crate::dataset::{self, LabeledDataset};
use crate::metrics::{self, ClassReport, ConfusionMatrix, RocCurve};
use crate::models::{
    fit_knn, fit_logistic, fit_svc, fit_tree, KernelSpec, KnnConfig, LogisticConfig, ModelKind,
    SvcConfig, TrainedModel, TreeConfig,
};
use crate::preprocess::{self, ScalerParams, SplitDataset, SHUFFLE_ALGORITHM};

/// Pipeline stages, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Clean,
    Engineer,
    Merge,
    Encode,
    Filter,
    Split,
    Scale,
    Fit,
    Evaluate,
    Emit,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Clean => "clean",
            Stage::Engineer => "engineer",
            Stage::Merge => "merge",
            Stage::Encode => "encode",
            Stage::Filter => "filter",
            Stage::Split => "split",
            Stage::Scale => "scale",
            Stage::Fit => "fit",
            Stage::Evaluate => "evaluate",
            Stage::Emit => "emit",
        };
        f.write_str(name)
    }
}

#[derive(Debug)]
pub struct PipelineError {
    pub stage: Stage,
    pub message: String,
}

impl PipelineError {
    fn new(stage: Stage, message: impl fmt::Display) -> Self {
        Self { stage, message: message.to_string() }
    }
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage {}: {}", self.stage, self.message)
    }
}

impl std::error::Error for PipelineError {}

/// TOML-facing SVC settings; `kernel` is "rbf" or "linear".
#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct SvcSettings {
    pub c: f64,
    pub kernel: String,
    pub gamma: Option<f64>,
    pub tol: f64,
    pub max_passes: usize,
    pub alpha_cutoff: f64,
}

impl Default for SvcSettings {
    fn default() -> Self {
        let base = SvcConfig::default();
        Self {
            c: base.c,
            kernel: "rbf".into(),
            gamma: None,
            tol: base.tol,
            max_passes: base.max_passes,
            alpha_cutoff: base.alpha_cutoff,
        }
    }
}

impl SvcSettings {
    pub fn to_config(&self) -> Result<SvcConfig, String> {
        let kernel = match self.kernel.as_str() {
            "linear" => KernelSpec::Linear,
            "rbf" => KernelSpec::Rbf { gamma: self.gamma },
            other => return Err(format!("unknown kernel {other:?} (expected rbf or linear)")),
        };
        Ok(SvcConfig {
            c: self.c,
            kernel,
            tol: self.tol,
            max_passes: self.max_passes,
            alpha_cutoff: self.alpha_cutoff,
        })
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_seed() -> u64 {
    42
}

fn default_ratio() -> f64 {
    0.8
}

fn default_true() -> bool {
    true
}

fn default_models() -> Vec<String> {
    ModelKind::ALL.iter().map(|k| k.key().to_string()).collect()
}

/// Full experiment configuration. Every field except the two input paths has
/// a default, and every effective value is echoed into the provenance block.
#[derive(Debug, Clone, Deserialize)]
pub struct RunConfig {
    pub rainfall_csv: PathBuf,
    pub flood_csv: PathBuf,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_ratio")]
    pub split_ratio: f64,
    #[serde(default)]
    pub start_year: Option<i32>,
    #[serde(default)]
    pub end_year: Option<i32>,
    #[serde(default = "default_true")]
    pub include_annual: bool,
    #[serde(default)]
    pub no_scale_columns: Vec<String>,
    #[serde(default = "default_models")]
    pub models: Vec<String>,
    #[serde(default)]
    pub logistic: LogisticConfig,
    #[serde(default)]
    pub svc: SvcSettings,
    #[serde(default)]
    pub knn: KnnConfig,
    #[serde(default)]
    pub tree: TreeConfig,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<RunConfig, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::new(Stage::Config, e))
    }

    pub fn load(path: &Path) -> Result<RunConfig, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| {
            PipelineError::new(Stage::Config, format!("cannot read {}: {e}", path.display()))
        })?;
        RunConfig::from_toml_str(&text)
    }

    /// Resolve model keys to kinds (summary-table order) and validate the
    /// scalar invariants.
    fn plan(&self) -> Result<Plan, PipelineError> {
        let config_err = |msg: String| PipelineError::new(Stage::Config, msg);
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(config_err(format!("split_ratio {} outside (0, 1)", self.split_ratio)));
        }
        if let (Some(start), Some(end)) = (self.start_year, self.end_year) {
            if start > end {
                return Err(config_err(format!("start_year {start} > end_year {end}")));
            }
        }
        if self.models.is_empty() {
            return Err(config_err("models list is empty".into()));
        }
        let mut requested = BTreeSet::new();
        for key in &self.models {
            let kind = ModelKind::from_key(key)
                .ok_or_else(|| config_err(format!("unknown model {key:?}")))?;
            requested.insert(kind.key());
        }
        let models: Vec<ModelKind> = ModelKind::ALL
            .iter()
            .copied()
            .filter(|k| requested.contains(k.key()))
            .collect();
        let svc = self.svc.to_config().map_err(config_err)?;
        Ok(Plan { models, svc })
    }

    /// Deterministic echo of every effective config value.
    fn echo(&self) -> String {
        let timeline = match (self.start_year, self.end_year) {
            (None, None) => "full".to_string(),
            (start, end) => format!(
                "{}..{}",
                start.map_or("open".into(), |y| y.to_string()),
                end.map_or("open".into(), |y| y.to_string())
            ),
        };
        let mut out = String::new();
        out.push_str(&format!("  rainfall_csv = {}\n", self.rainfall_csv.display()));
        out.push_str(&format!("  flood_csv = {}\n", self.flood_csv.display()));
        out.push_str(&format!("  output_dir = {}\n", self.output_dir.display()));
        out.push_str(&format!("  seed = {}\n", self.seed));
        out.push_str(&format!("  split_ratio = {}\n", self.split_ratio));
        out.push_str(&format!("  timeline = {timeline}\n"));
        out.push_str(&format!("  include_annual = {}\n", self.include_annual));
        out.push_str(&format!("  no_scale_columns = {:?}\n", self.no_scale_columns));
        out.push_str(&format!("  models = {:?}\n", self.models));
        out.push_str(&format!(
            "  logistic: learning_rate={} max_iters={} tolerance={} l2={}\n",
            self.logistic.learning_rate, self.logistic.max_iters, self.logistic.tolerance,
            self.logistic.l2
        ));
        out.push_str(&format!(
            "  svc: c={} kernel={} gamma={} tol={} max_passes={} alpha_cutoff={}\n",
            self.svc.c,
            self.svc.kernel,
            self.svc.gamma.map_or("scale".into(), |g| g.to_string()),
            self.svc.tol,
            self.svc.max_passes,
            self.svc.alpha_cutoff
        ));
        out.push_str(&format!("  knn: k={}\n", self.knn.k));
        out.push_str(&format!(
            "  tree: max_depth={} min_samples={} min_gain={} weighted_gain={}\n",
            self.tree.max_depth, self.tree.min_samples, self.tree.min_gain,
            self.tree.weighted_gain
        ));
        out
    }
}

#[derive(Debug)]
struct Plan {
    models: Vec<ModelKind>,
    svc: SvcConfig,
}

/// Evaluation artifacts for one fitted model.
#[derive(Debug, Clone)]
pub struct ModelEval {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub report: ClassReport,
    pub confusion: ConfusionMatrix,
    pub roc: RocCurve,
}

#[derive(Debug, Clone)]
pub struct ModelEntry {
    pub kind: ModelKind,
    pub outcome: Result<ModelEval, String>,
}

/// Everything recorded about a run besides the metric tables.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub config_echo: String,
    pub shuffle: String,
    pub raw_records: usize,
    pub imputed_cells: usize,
    pub coverage_warnings: Vec<String>,
    pub total_rows: usize,
    pub stations: usize,
    pub filtered_rows: usize,
    pub train_rows: usize,
    pub train_positives: usize,
    pub test_rows: usize,
    pub test_positives: usize,
    pub constant_columns: Vec<String>,
    pub model_notes: Vec<String>,
    /// Reported on stdout by the CLI; kept out of provenance.txt so repeated
    /// runs stay byte-identical.
    pub wall_clock: Duration,
}

impl Provenance {
    pub fn render(&self) -> String {
        let mut out = String::from("run provenance\n==============\nconfig:\n");
        out.push_str(&self.config_echo);
        out.push_str(&format!("shuffle: {}\n", self.shuffle));
        out.push_str("data:\n");
        out.push_str(&format!("  raw daily records = {}\n", self.raw_records));
        out.push_str(&format!("  imputed day cells = {}\n", self.imputed_cells));
        out.push_str(&format!(
            "  month coverage warnings = {}\n",
            self.coverage_warnings.len()
        ));
        for w in &self.coverage_warnings {
            out.push_str(&format!("    {w}\n"));
        }
        out.push_str(&format!("  stations = {}\n", self.stations));
        out.push_str(&format!("  station-year rows = {}\n", self.total_rows));
        out.push_str(&format!("  rows after timeline filter = {}\n", self.filtered_rows));
        out.push_str(&format!(
            "  train rows = {} (positives = {})\n",
            self.train_rows, self.train_positives
        ));
        out.push_str(&format!(
            "  test rows = {} (positives = {})\n",
            self.test_rows, self.test_positives
        ));
        out.push_str(&format!("  constant columns = {:?}\n", self.constant_columns));
        out.push_str("models:\n");
        for note in &self.model_notes {
            out.push_str(&format!("  {note}\n"));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub entries: Vec<ModelEntry>,
    pub scaler: ScalerParams,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub provenance: Provenance,
}

impl RunReport {
    /// `Model,Accuracy,Precision,Recall` at four decimals, summary-table
    /// order. Failed models keep their row with empty metric cells.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("Model,Accuracy,Precision,Recall\n");
        for entry in &self.entries {
            match &entry.outcome {
                Ok(eval) => out.push_str(&format!(
                    "{},{:.4},{:.4},{:.4}\n",
                    entry.kind.display_name(),
                    eval.accuracy,
                    eval.precision,
                    eval.recall
                )),
                Err(_) => out.push_str(&format!("{},,,\n", entry.kind.display_name())),
            }
        }
        out
    }

    pub fn split_indices_csv(&self) -> String {
        let mut partition = vec!["test"; self.train_indices.len() + self.test_indices.len()];
        for &i in &self.train_indices {
            partition[i] = "train";
        }
        let mut out = String::from("row_index,partition\n");
        for (i, p) in partition.iter().enumerate() {
            out.push_str(&format!("{i},{p}\n"));
        }
        out
    }

    /// All successful ROC curves on one plot, AUC per model in the legend.
    pub fn roc_svg(&self) -> String {
        const SIZE: f64 = 480.0;
        const MARGIN: f64 = 50.0;
        let x = |fpr: f64| MARGIN + fpr * SIZE;
        let y = |tpr: f64| MARGIN + (1.0 - tpr) * SIZE;
        let color = |kind: ModelKind| match kind {
            ModelKind::Logistic => "#1f77b4",
            ModelKind::Svc => "#ff7f0e",
            ModelKind::Knn => "#2ca02c",
            ModelKind::Tree => "#d62728",
        };
        let mut svg = String::new();
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n",
            SIZE + 2.0 * MARGIN
        ));
        svg.push_str(&format!(
            "  <rect x=\"{m}\" y=\"{m}\" width=\"{s}\" height=\"{s}\" fill=\"none\" stroke=\"#333\"/>\n",
            m = MARGIN,
            s = SIZE
        ));
        svg.push_str(&format!(
            "  <line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#999\" stroke-dasharray=\"6 4\"/>\n",
            x(0.0), y(0.0), x(1.0), y(1.0)
        ));
        for tick in [0.0, 0.2, 0.4, 0.6, 0.8, 1.0] {
            svg.push_str(&format!(
                "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{tick:.1}</text>\n",
                x(tick),
                MARGIN + SIZE + 18.0
            ));
            svg.push_str(&format!(
                "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{tick:.1}</text>\n",
                MARGIN - 8.0,
                y(tick) + 4.0
            ));
        }
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">False positive rate</text>\n",
            MARGIN + SIZE / 2.0,
            MARGIN + SIZE + 38.0
        ));
        svg.push_str(&format!(
            "  <text x=\"14\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.2})\">True positive rate</text>\n",
            MARGIN + SIZE / 2.0,
            MARGIN + SIZE / 2.0
        ));
        let mut legend_row = 0;
        for entry in &self.entries {
            let Ok(eval) = &entry.outcome else { continue };
            let path: Vec<String> = eval
                .roc
                .points
                .iter()
                .map(|p| format!("{:.2},{:.2}", x(p.false_positive_rate), y(p.true_positive_rate)))
                .collect();
            svg.push_str(&format!(
                "  <polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                path.join(" "),
                color(entry.kind)
            ));
            let ly = MARGIN + 18.0 + 18.0 * legend_row as f64;
            svg.push_str(&format!(
                "  <rect x=\"{:.2}\" y=\"{:.2}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n",
                MARGIN + 14.0,
                ly - 10.0,
                color(entry.kind)
            ));
            svg.push_str(&format!(
                "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">{} (AUC = {:.4})</text>\n",
                MARGIN + 32.0,
                ly,
                entry.kind.display_name(),
                eval.roc.auc
            ));
            legend_row += 1;
        }
        svg.push_str("</svg>\n");
        svg
    }
}

/// Retain rows with year inside [start, end]; the station code map is
/// unchanged.
pub fn filter_timeline(
    dataset: &LabeledDataset,
    start_year: i32,
    end_year: i32,
) -> Result<LabeledDataset, PipelineError> {
    if start_year > end_year {
        return Err(PipelineError::new(
            Stage::Config,
            format!("start_year {start_year} > end_year {end_year}"),
        ));
    }
    let rows: Vec<_> = dataset
        .rows()
        .iter()
        .filter(|r| (start_year..=end_year).contains(&r.year))
        .cloned()
        .collect();
    if rows.is_empty() {
        return Err(PipelineError::new(
            Stage::Filter,
            format!("no rows with year in [{start_year}, {end_year}]"),
        ));
    }
    LabeledDataset::from_parts(rows, dataset.station_names().to_vec())
        .map_err(|e| PipelineError::new(Stage::Filter, e))
}

/// Train-fitted scaler plus the transformed train and test matrices.
pub type ScaledSplit = (ScalerParams, Vec<Vec<f64>>, Vec<Vec<f64>>);

/// Fit the scaler on the training rows only and transform both partitions.
pub fn scale_split(
    train: &[Vec<f64>],
    test: &[Vec<f64>],
    columns: &[String],
    exempt: &[String],
) -> Result<ScaledSplit, preprocess::PreprocessError> {
    let scaler = preprocess::fit_scaler(train, columns)?.exempt_columns(exempt)?;
    let train_scaled = scaler.transform(train)?;
    let test_scaled = scaler.transform(test)?;
    Ok((scaler, train_scaled, test_scaled))
}

fn fit_model(
    kind: ModelKind,
    features: &[Vec<f64>],
    labels: &[u8],
    config: &RunConfig,
    plan: &Plan,
) -> Result<TrainedModel, String> {
    let model = match kind {
        ModelKind::Logistic => TrainedModel::Logistic(
            fit_logistic(features, labels, &config.logistic).map_err(|e| e.to_string())?,
        ),
        ModelKind::Svc => {
            TrainedModel::Svc(fit_svc(features, labels, &plan.svc).map_err(|e| e.to_string())?)
        }
        ModelKind::Knn => {
            TrainedModel::Knn(fit_knn(features, labels, &config.knn).map_err(|e| e.to_string())?)
        }
        ModelKind::Tree => {
            TrainedModel::Tree(fit_tree(features, labels, &config.tree).map_err(|e| e.to_string())?)
        }
    };
    Ok(model)
}

fn model_note(kind: ModelKind, model: &TrainedModel) -> String {
    match model {
        TrainedModel::Logistic(m) => format!(
            "{}: iterations={} final_loss={}",
            kind.key(),
            m.iterations,
            m.final_loss
        ),
        TrainedModel::Svc(m) => {
            let kernel = match m.kernel {
                crate::models::Kernel::Linear => "linear".to_string(),
                crate::models::Kernel::Rbf { gamma } => format!("rbf(gamma={gamma})"),
            };
            format!(
                "{}: support_vectors={} sweeps={} kernel={} c={}",
                kind.key(),
                m.support_vectors.len(),
                m.sweeps,
                kernel,
                m.c
            )
        }
        TrainedModel::Knn(m) => {
            format!("{}: k={} stored_rows={}", kind.key(), m.k, m.train_features.len())
        }
        TrainedModel::Tree(m) => {
            format!("{}: nodes={} depth={}", kind.key(), m.node_count(), m.depth())
        }
    }
}

fn evaluate_model(
    model: &TrainedModel,
    test_features: &[Vec<f64>],
    test_labels: &[u8],
) -> Result<ModelEval, PipelineError> {
    let stage = |e: &dyn fmt::Display| PipelineError::new(Stage::Evaluate, e);
    let predictions = model.predict_batch(test_features).map_err(|e| stage(&e))?;
    let scores = model.score_batch(test_features).map_err(|e| stage(&e))?;
    let confusion = metrics::confusion(test_labels, &predictions).map_err(|e| stage(&e))?;
    let report = ClassReport::from_confusion(&confusion);
    let roc = metrics::roc_curve(test_labels, &scores).map_err(|e| stage(&e))?;
    Ok(ModelEval {
        accuracy: report.accuracy,
        precision: report.class1.precision,
        recall: report.class1.recall,
        report,
        confusion,
        roc,
    })
}

/// Run every stage and return the in-memory report. Writes nothing; pair
/// with [`emit_run`] for the artifact tree.
pub fn run_pipeline(config: &RunConfig) -> Result<RunReport, PipelineError> {
    let started = Instant::now();
    let plan = config.plan()?;

    let rainfall_text = fs::read_to_string(&config.rainfall_csv).map_err(|e| {
        PipelineError::new(
            Stage::Ingest,
            format!("cannot read {}: {e}", config.rainfall_csv.display()),
        )
    })?;
    let raw = dataset::parse_daily_rainfall(rainfall_text.as_bytes())
        .map_err(|e| PipelineError::new(Stage::Ingest, e))?;
    let flood_text = fs::read_to_string(&config.flood_csv).map_err(|e| {
        PipelineError::new(
            Stage::Ingest,
            format!("cannot read {}: {e}", config.flood_csv.display()),
        )
    })?;
    let floods = dataset::parse_flood_csv(flood_text.as_bytes())
        .map_err(|e| PipelineError::new(Stage::Ingest, e))?;

    let (imputed, imputed_cells) = dataset::impute_missing(&raw);

    let (totals, coverage) =
        dataset::aggregate_monthly(&imputed).map_err(|e| PipelineError::new(Stage::Engineer, e))?;
    let merged = dataset::merge_flood_labels(&totals, &floods)
        .map_err(|e| PipelineError::new(Stage::Merge, e))?;

    let full = dataset::encode_labels(&merged).map_err(|e| PipelineError::new(Stage::Encode, e))?;

    let filtered = match (config.start_year, config.end_year) {
        (None, None) => full.clone(),
        (start, end) => filter_timeline(
            &full,
            start.unwrap_or(i32::MIN),
            end.unwrap_or(i32::MAX),
        )?,
    };

    let (matrix, labels, columns) = filtered.feature_matrix(config.include_annual);
    let split: SplitDataset =
        preprocess::train_test_split(&matrix, &labels, config.split_ratio, config.seed)
            .map_err(|e| PipelineError::new(Stage::Split, e))?;

    let (scaler, train_scaled, test_scaled) = scale_split(
        &split.train_features,
        &split.test_features,
        &columns,
        &config.no_scale_columns,
    )
    .map_err(|e| PipelineError::new(Stage::Scale, e))?;

    let mut entries = Vec::with_capacity(plan.models.len());
    let mut model_notes = Vec::new();
    for &kind in &plan.models {
        match fit_model(kind, &train_scaled, &split.train_labels, config, &plan) {
            Ok(model) => {
                model_notes.push(model_note(kind, &model));
                let eval = evaluate_model(&model, &test_scaled, &split.test_labels)?;
                entries.push(ModelEntry { kind, outcome: Ok(eval) });
            }
            Err(message) => {
                model_notes.push(format!("{}: fit failed: {message}", kind.key()));
                entries.push(ModelEntry { kind, outcome: Err(message) });
            }
        }
    }

    let count_positives = |labels: &[u8]| labels.iter().filter(|&&y| y == 1).count();
    let provenance = Provenance {
        config_echo: config.echo(),
        shuffle: format!("{SHUFFLE_ALGORITHM}, seed = {}", config.seed),
        raw_records: raw.len(),
        imputed_cells,
        coverage_warnings: coverage.iter().map(|w| w.to_string()).collect(),
        total_rows: full.rows().len(),
        stations: full.station_names().len(),
        filtered_rows: filtered.rows().len(),
        train_rows: split.train_labels.len(),
        train_positives: count_positives(&split.train_labels),
        test_rows: split.test_labels.len(),
        test_positives: count_positives(&split.test_labels),
        constant_columns: scaler.constant_columns().iter().map(|s| s.to_string()).collect(),
        model_notes,
        wall_clock: started.elapsed(),
    };

    Ok(RunReport {
        entries,
        scaler,
        train_indices: split.train_indices,
        test_indices: split.test_indices,
        provenance,
    })
}

/// Write the artifact tree. On any write failure the files created so far
/// are removed and the error names the emit stage.
pub fn emit_run(report: &RunReport, out_dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    fs::create_dir_all(out_dir)
        .map_err(|e| PipelineError::new(Stage::Emit, format!("{}: {e}", out_dir.display())))?;
    let mut written: Vec<PathBuf> = Vec::new();
    let write = |written: &mut Vec<PathBuf>, name: String, content: &str| {
        let path = out_dir.join(&name);
        match fs::write(&path, content) {
            Ok(()) => {
                written.push(path);
                Ok(())
            }
            Err(e) => Err(PipelineError::new(Stage::Emit, format!("{name}: {e}"))),
        }
    };

    let result = (|| {
        write(&mut written, "summary.csv".into(), &report.summary_csv())?;
        for entry in &report.entries {
            let Ok(eval) = &entry.outcome else { continue };
            let key = entry.kind.key();
            write(&mut written, format!("report_{key}.txt"), &eval.report.render())?;
            write(&mut written, format!("confusion_{key}.csv"), &eval.confusion.to_csv())?;
            write(&mut written, format!("roc_{key}.csv"), &eval.roc.to_csv())?;
        }
        write(&mut written, "roc.svg".into(), &report.roc_svg())?;
        write(&mut written, "provenance.txt".into(), &report.provenance.render())?;
        write(&mut written, "split_indices.csv".into(), &report.split_indices_csv())?;
        write(&mut written, "scaler.csv".into(), &report.scaler.to_csv())?;
        Ok(())
    })();

    if let Err(e) = result {
        for path in &written {
            let _ = fs::remove_file(path);
        }
        return Err(e);
    }
    Ok(written)
}

/// One parsed row of a summary CSV; metrics are absent for failed models.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub model: String,
    pub metrics: Option<(f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub rows: Vec<SummaryRow>,
}

impl RunSummary {
    pub fn parse(text: &str) -> Result<RunSummary, PipelineError> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        if header != "Model,Accuracy,Precision,Recall" {
            return Err(PipelineError::new(
                Stage::Config,
                format!("unexpected summary header {header:?}"),
            ));
        }
        let mut rows = Vec::new();
        for line in lines {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(PipelineError::new(
                    Stage::Config,
                    format!("summary row {line:?} does not have 4 fields"),
                ));
            }
            let metrics = if fields[1].is_empty() {
                None
            } else {
                let parse = |s: &str| {
                    s.parse::<f64>().map_err(|_| {
                        PipelineError::new(Stage::Config, format!("bad metric {s:?}"))
                    })
                };
                Some((parse(fields[1])?, parse(fields[2])?, parse(fields[3])?))
            };
            rows.push(SummaryRow { model: fields[0].to_string(), metrics });
        }
        Ok(RunSummary { rows })
    }

    pub fn load(path: &Path) -> Result<RunSummary, PipelineError> {
        let path = if path.is_dir() { path.join("summary.csv") } else { path.to_path_buf() };
        let text = fs::read_to_string(&path).map_err(|e| {
            PipelineError::new(Stage::Config, format!("cannot read {}: {e}", path.display()))
        })?;
        RunSummary::parse(&text)
    }
}

/// Side-by-side metric deltas between two runs, better value flagged per
/// cell. Models present in only one run are warned about and skipped.
pub fn compare_summaries(a: &RunSummary, b: &RunSummary) -> String {
    let mut out = String::new();
    let names_a: Vec<&String> = a.rows.iter().map(|r| &r.model).collect();
    let names_b: Vec<&String> = b.rows.iter().map(|r| &r.model).collect();
    let only_a: Vec<&&String> = names_a.iter().filter(|m| !names_b.contains(m)).collect();
    let only_b: Vec<&&String> = names_b.iter().filter(|m| !names_a.contains(m)).collect();
    if !only_a.is_empty() || !only_b.is_empty() {
        out.push_str(&format!(
            "warning: model sets differ (only in A: {only_a:?}, only in B: {only_b:?}); comparing the intersection\n"
        ));
    }

    out.push_str(&format!(
        "{:<34} {:<9} {:>8} {:>8} {:>8}  {}\n",
        "model", "metric", "run_a", "run_b", "delta", "better"
    ));
    for row_a in &a.rows {
        let Some(row_b) = b.rows.iter().find(|r| r.model == row_a.model) else { continue };
        match (&row_a.metrics, &row_b.metrics) {
            (Some(ma), Some(mb)) => {
                let metrics = [
                    ("Accuracy", ma.0, mb.0),
                    ("Precision", ma.1, mb.1),
                    ("Recall", ma.2, mb.2),
                ];
                for (name, va, vb) in metrics {
                    let delta = vb - va;
                    let better = if delta > 0.0 {
                        "B"
                    } else if delta < 0.0 {
                        "A"
                    } else {
                        "="
                    };
                    out.push_str(&format!(
                        "{:<34} {:<9} {:>8.4} {:>8.4} {:>+8.4}  {}\n",
                        row_a.model, name, va, vb, delta, better
                    ));
                }
            }
            _ => {
                out.push_str(&format!(
                    "{:<34} (skipped: missing metrics in one run)\n",
                    row_a.model
                ));
            }
        }
    }
    out
}
