//! End-to-end run: load or generate flows, add radio telemetry, clean,
//! split, scale, balance, select features and train/score the model suite
//! for the attack-type and latency-quality tasks.
//!
//! Every random stage draws its seed from `derive_seed(master, stage)`
//! unless `seeds.<stage>` overrides it, so reseeding one stage leaves the
//! others untouched. Stage names: `generate`, `augment`, `split`,
//! `smote.ddos`, `smote.latency`, `model.<kind>`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment5g::{self, AugmentConfig, LATENCY_COLUMN, LATENCY_LABEL_COLUMN};
use crate::balance::{self, SmoteConfig};
use crate::featsel::{self, ScoreMode};
use crate::ingest::{self, IngestSpec};
use crate::learners::{self, HyperValue, ModelKind, ModelSpec, TrainedModel};
use crate::preprocess::{self, CleanPolicy, LabelEncoder, Scaler, TransformSet};
use crate::report::{self, EmitFormats, ModelResult, RunManifest, ScoreSet, TaskResult};
use crate::schema;
use crate::seed;
use crate::synthgen::{self, FaultSpec};
use crate::tabular::FeatureTable;

pub const CONFIG_VERSION: u32 = 1;
pub const TASKS: [&str; 2] = ["ddos", "latency"];
pub const TARGET_COLUMN: &str = "target";
pub const TRANSFORMS_FILE: &str = "transforms.json";

pub const LEAKAGE_WARNING: &str = "paper_faithful mode oversamples and scales the full dataset before \
the train/test split; synthetic test rows are interpolated from training rows and scaler statistics \
include the test set, so scores are optimistic";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("stage `{stage}`: {source}")]
    Stage { stage: String, source: Box<dyn std::error::Error + Send + Sync> },
}

impl PipelineError {
    fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        PipelineError::Config { path: path.into(), message: message.into() }
    }
}

fn stage<E: std::error::Error + Send + Sync + 'static>(name: impl Into<String>) -> impl FnOnce(E) -> PipelineError {
    let stage = name.into();
    move |e| PipelineError::Stage { stage, source: Box::new(e) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Default,
    PaperFaithful,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Default => "default",
            Mode::PaperFaithful => "paper_faithful",
        }
    }
}

/// Synthetic source: the 13-label table divided by `divisor`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateSource {
    pub divisor: usize,
    pub separability: f64,
    /// Flow-statistic columns to emit (schema order); all of them by default.
    pub n_features: usize,
    /// Replaces the reference label counts when non-empty (before `divisor`).
    pub rows_per_class: BTreeMap<String, usize>,
    pub faults: Option<FaultSpec>,
}

impl Default for GenerateSource {
    fn default() -> Self {
        Self {
            divisor: 1,
            separability: 1.0,
            n_features: schema::flow_feature_columns().len(),
            rows_per_class: BTreeMap::new(),
            faults: None,
        }
    }
}

impl GenerateSource {
    pub fn spec(&self, seed: u64) -> synthgen::GenSpec {
        let mut spec = synthgen::reference_distribution_spec(seed).with_separability(self.separability);
        spec.n_features = self.n_features;
        if !self.rows_per_class.is_empty() {
            spec.rows_per_class = self.rows_per_class.clone();
        }
        spec.faults = self.faults.clone();
        spec.scaled(self.divisor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitOptions {
    pub test_fraction: f64,
    pub stratify_on: String,
}

impl Default for SplitOptions {
    fn default() -> Self {
        Self { test_fraction: 0.2, stratify_on: schema::LABEL_COLUMN.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoteOptions {
    pub k_neighbors: usize,
}

impl Default for SmoteOptions {
    fn default() -> Self {
        Self { k_neighbors: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelEntry {
    pub kind: ModelKind,
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, HyperValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub version: u32,
    pub master_seed: u64,
    pub mode: Mode,
    pub output_dir: PathBuf,
    pub generate: Option<GenerateSource>,
    pub ingest: Option<IngestSpec>,
    pub augment: AugmentConfig,
    pub drop_columns: Vec<String>,
    pub clean_policy: CleanPolicy,
    pub split: SplitOptions,
    pub smote: SmoteOptions,
    pub k_best: usize,
    pub rfe_final: usize,
    pub score_mode: ScoreMode,
    /// Extra columns withheld from the latency task's features.
    pub latency_drop: Vec<String>,
    pub models: Vec<ModelEntry>,
    /// Per-stage seed overrides.
    pub seeds: BTreeMap<String, u64>,
    pub save_models: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            master_seed: 0,
            mode: Mode::Default,
            output_dir: PathBuf::from("out"),
            generate: None,
            ingest: None,
            augment: AugmentConfig::default(),
            drop_columns: schema::DEFAULT_DROP.iter().map(|s| s.to_string()).collect(),
            clean_policy: CleanPolicy::DropRows,
            split: SplitOptions::default(),
            smote: SmoteOptions::default(),
            k_best: 40,
            rfe_final: 20,
            score_mode: ScoreMode::FRegression,
            latency_drop: vec![LATENCY_COLUMN.to_string()],
            models: ModelKind::ALL.iter().map(|&kind| ModelEntry { kind, hyperparameters: BTreeMap::new() }).collect(),
            seeds: BTreeMap::new(),
            save_models: true,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::config("<toml>", e.to_string().trim_end()))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::config(path.display().to_string(), e.to_string()))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn stage_seed(&self, name: &str) -> u64 {
        self.seeds.get(name).copied().unwrap_or_else(|| seed::derive_seed(self.master_seed, name))
    }

    pub fn model_specs(&self) -> Vec<ModelSpec> {
        self.models
            .iter()
            .map(|m| ModelSpec {
                kind: m.kind,
                hyperparameters: m.hyperparameters.clone(),
                seed: self.stage_seed(&format!("model.{}", m.kind)),
            })
            .collect()
    }

    /// Checks everything that can be checked before touching data.
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.version != CONFIG_VERSION {
            return Err(PipelineError::config("version", format!("unsupported version {}", self.version)));
        }
        match (&self.generate, &self.ingest) {
            (Some(_), Some(_)) => {
                return Err(PipelineError::config("generate/ingest", "give exactly one data source, not both"))
            }
            (None, None) => return Err(PipelineError::config("generate/ingest", "no data source given")),
            _ => {}
        }
        if let Some(g) = &self.generate {
            if g.divisor == 0 {
                return Err(PipelineError::config("generate.divisor", "must be >= 1"));
            }
            if !(0.0..=1.0).contains(&g.separability) {
                return Err(PipelineError::config("generate.separability", "must be in [0, 1]"));
            }
            if g.n_features == 0 || g.n_features > schema::flow_feature_columns().len() {
                return Err(PipelineError::config(
                    "generate.n_features",
                    format!("must be in 1..={}", schema::flow_feature_columns().len()),
                ));
            }
        }
        if let Some(i) = &self.ingest {
            i.validate().map_err(|e| PipelineError::config("ingest", e.to_string()))?;
        }
        self.augment.validate().map_err(|e| PipelineError::config("augment", e.to_string()))?;
        if !(self.split.test_fraction > 0.0 && self.split.test_fraction < 1.0) {
            return Err(PipelineError::config("split.test_fraction", "must be in (0, 1)"));
        }
        if self.smote.k_neighbors == 0 {
            return Err(PipelineError::config("smote.k_neighbors", "must be >= 1"));
        }
        if self.rfe_final == 0 {
            return Err(PipelineError::config("rfe_final", "must be >= 1"));
        }
        if self.rfe_final > self.k_best {
            return Err(PipelineError::config(
                "rfe_final",
                format!("{} exceeds k_best {}", self.rfe_final, self.k_best),
            ));
        }
        if let Some(g) = &self.generate {
            // Generated tables have a known width: flow columns, protocol, three telemetry columns.
            let mut names: Vec<String> =
                schema::flow_feature_columns().into_iter().take(g.n_features).map(String::from).collect();
            names.push(schema::PROTOCOL.into());
            names.extend([augment5g::RSRP_COLUMN, augment5g::RSRQ_COLUMN, LATENCY_COLUMN].map(String::from));
            self.check_width(&names)?;
        }
        if self.models.is_empty() {
            return Err(PipelineError::config("models", "at least one model is required"));
        }
        for (i, spec) in self.model_specs().iter().enumerate() {
            spec.resolve().map_err(|e| PipelineError::config(format!("models[{i}].hyperparameters"), e.to_string()))?;
        }
        Ok(())
    }

    fn task_features(&self, task: &str, numeric: &[String]) -> Vec<String> {
        numeric
            .iter()
            .filter(|n| task != "latency" || !self.latency_drop.contains(n))
            .cloned()
            .collect()
    }

    /// `k_best` must fit in every task's feature set.
    fn check_width(&self, numeric: &[String]) -> Result<(), PipelineError> {
        let kept: Vec<String> = numeric.iter().filter(|n| !self.drop_columns.contains(n)).cloned().collect();
        for task in TASKS {
            let available = self.task_features(task, &kept).len();
            if self.k_best > available {
                return Err(PipelineError::config(
                    "k_best",
                    format!("{} exceeds the {available} features available to the {task} task", self.k_best),
                ));
            }
        }
        Ok(())
    }

    fn snapshot(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config is always serializable");
        if let Some(m) = v.as_object_mut() {
            m.remove("output_dir");
        }
        v
    }
}

/// Data and fitted transforms from the shared front of the pipeline.
struct Prepared {
    table: FeatureTable,
    rows_loaded: usize,
    encoders: BTreeMap<String, LabelEncoder>,
    codes: BTreeMap<String, Vec<usize>>,
}

fn load_source(cfg: &PipelineConfig) -> Result<FeatureTable, PipelineError> {
    if let Some(g) = &cfg.generate {
        synthgen::generate(&g.spec(cfg.stage_seed("generate"))).map_err(stage("generate"))
    } else {
        let spec = cfg.ingest.as_ref().expect("validated: one source");
        ingest::load_all(spec).map_err(stage("ingest"))
    }
}

fn prepare(cfg: &PipelineConfig) -> Result<Prepared, PipelineError> {
    let raw = load_source(cfg)?;
    let rows_loaded = raw.n_rows();
    let mut aug_cfg = cfg.augment.clone();
    aug_cfg.seed = cfg.stage_seed("augment");
    let table = augment5g::augment(&raw, &aug_cfg).map_err(stage("augment"))?;
    drop(raw);

    let label_cols = [(TASKS[0], cfg.augment.label_column.as_str()), (TASKS[1], LATENCY_LABEL_COLUMN)];
    let mut encoders = BTreeMap::new();
    for (task, col) in label_cols {
        let labels = table
            .string_column(col)
            .ok_or_else(|| PipelineError::Stage { stage: "encode".into(), source: format!("missing column `{col}`").into() })?;
        encoders.insert(task.to_string(), LabelEncoder::fit(labels).map_err(stage("encode"))?);
    }

    let drop: Vec<&String> = cfg.drop_columns.iter().filter(|c| table.has_column(c)).collect();
    let table = preprocess::drop_and_clean(&table, &drop, cfg.clean_policy).map_err(stage("clean"))?;
    if table.n_rows() == 0 {
        return Err(PipelineError::Stage { stage: "clean".into(), source: "no rows left after cleaning".into() });
    }
    cfg.check_width(&table.column_names())?;

    let mut codes = BTreeMap::new();
    for (task, col) in label_cols {
        let labels = table.string_column(col).expect("checked above");
        codes.insert(task.to_string(), encoders[task].encode(labels).map_err(stage("encode"))?);
    }
    Ok(Prepared { table, rows_loaded, encoders, codes })
}

/// Training and test data of one task, ready for selection.
struct TaskData {
    train_x: FeatureTable,
    train_y: Vec<usize>,
    test_x: FeatureTable,
    test_y: Vec<usize>,
    scaler: Scaler,
}

fn default_order(cfg: &PipelineConfig, p: &Prepared) -> Result<BTreeMap<String, TaskData>, PipelineError> {
    let split = preprocess::SplitSpec {
        test_fraction: cfg.split.test_fraction,
        stratify_on: cfg.split.stratify_on.clone(),
        seed: cfg.stage_seed("split"),
    };
    let keys = p
        .table
        .string_column(&split.stratify_on)
        .ok_or_else(|| PipelineError::config("split.stratify_on", format!("no text column `{}`", split.stratify_on)))?;
    let (train_idx, test_idx) =
        preprocess::stratified_split_indices(keys, split.test_fraction, split.seed).map_err(stage("split"))?;
    let numeric = p.table.numeric_only();
    let train = numeric.take_rows(&train_idx);
    let test = numeric.take_rows(&test_idx);
    let scaler = Scaler::fit(&train);
    let train = scaler.apply(&train).map_err(stage("scale"))?;
    let test = scaler.apply(&test).map_err(stage("scale"))?;

    let mut out = BTreeMap::new();
    for task in TASKS {
        let cols = cfg.task_features(task, &train.column_names());
        let train_x = train.select_columns(&cols).map_err(stage("select"))?;
        let test_x = test.select_columns(&cols).map_err(stage("select"))?;
        let codes = &p.codes[task];
        let train_y: Vec<usize> = train_idx.iter().map(|&i| codes[i]).collect();
        let test_y: Vec<usize> = test_idx.iter().map(|&i| codes[i]).collect();
        let smote_stage = format!("smote.{task}");
        let smote_cfg = SmoteConfig { k_neighbors: cfg.smote.k_neighbors, seed: cfg.stage_seed(&smote_stage) };
        let (train_x, train_y) = balance::smote(&train_x, &train_y, &smote_cfg).map_err(stage(smote_stage))?;
        let scaler = scaler.project(&cols).map_err(stage("scale"))?;
        out.insert(task.to_string(), TaskData { train_x, train_y, test_x, test_y, scaler });
    }
    Ok(out)
}

fn faithful_order(cfg: &PipelineConfig, p: &Prepared) -> Result<BTreeMap<String, TaskData>, PipelineError> {
    let numeric = p.table.numeric_only();
    let mut out = BTreeMap::new();
    for task in TASKS {
        let cols = cfg.task_features(task, &numeric.column_names());
        let x = numeric.select_columns(&cols).map_err(stage("select"))?;
        let smote_stage = format!("smote.{task}");
        let smote_cfg = SmoteConfig { k_neighbors: cfg.smote.k_neighbors, seed: cfg.stage_seed(&smote_stage) };
        let (x, y) = balance::smote(&x, &p.codes[task], &smote_cfg).map_err(stage(smote_stage))?;
        let scaler = Scaler::fit(&x);
        let x = scaler.apply(&x).map_err(stage("scale"))?;
        let (train_idx, test_idx) =
            preprocess::stratified_split_indices(&y, cfg.split.test_fraction, cfg.stage_seed("split"))
                .map_err(stage("split"))?;
        out.insert(
            task.to_string(),
            TaskData {
                train_x: x.take_rows(&train_idx),
                train_y: train_idx.iter().map(|&i| y[i]).collect(),
                test_x: x.take_rows(&test_idx),
                test_y: test_idx.iter().map(|&i| y[i]).collect(),
                scaler,
            },
        );
    }
    Ok(out)
}

/// Everything a run produces, before it is written out.
pub struct RunOutput {
    pub manifest: RunManifest,
    pub models: BTreeMap<String, Vec<TrainedModel>>,
    pub test_sets: BTreeMap<String, (FeatureTable, Vec<usize>)>,
    pub transforms: TransformSet,
}

/// Runs every stage in memory; nothing is written.
pub fn execute(cfg: &PipelineConfig) -> Result<RunOutput, PipelineError> {
    cfg.validate()?;
    let prepared = prepare(cfg)?;
    let tasks = match cfg.mode {
        Mode::Default => default_order(cfg, &prepared)?,
        Mode::PaperFaithful => faithful_order(cfg, &prepared)?,
    };
    let specs = cfg.model_specs();
    let ranker = featsel::default_ranker();

    let mut transforms = TransformSet::new();
    let mut results = Vec::new();
    let mut all_models = BTreeMap::new();
    let mut test_sets = BTreeMap::new();
    for task in TASKS {
        let data = &tasks[task];
        let sel_stage = format!("featsel.{task}");
        let sel = featsel::select(&data.train_x, &data.train_y, cfg.k_best, cfg.rfe_final, cfg.score_mode, &ranker)
            .map_err(stage(sel_stage.clone()))?;
        let chosen = sel.rfe.survivors.clone();
        let train_x = data.train_x.select_columns(&chosen).map_err(stage(sel_stage.clone()))?;
        let test_x = data.test_x.select_columns(&chosen).map_err(stage(sel_stage))?;
        let encoder = &prepared.encoders[task];
        let k = encoder.n_classes();

        let fitted: Vec<(TrainedModel, ScoreSet, report::ConfusionMatrix)> = specs
            .par_iter()
            .map(|spec| {
                let name = format!("model.{}.{task}", spec.kind);
                let model = learners::fit(spec, &train_x, &data.train_y).map_err(stage(name.clone()))?;
                let pred = learners::predict(&model, &test_x).map_err(stage(name.clone()))?;
                let cm = report::confusion(&data.test_y, &pred, k).map_err(stage(name.clone()))?;
                let s = report::scores(&cm).map_err(stage(name))?;
                Ok((model, s, cm))
            })
            .collect::<Result<_, PipelineError>>()?;

        let mut counts = vec![0usize; k];
        for &c in &data.train_y {
            counts[c] += 1;
        }
        let mut models = Vec::new();
        let mut model_results = Vec::new();
        for (model, scores, confusion) in fitted {
            model_results.push(ModelResult {
                model: model.spec.kind.to_string(),
                substitute: model.spec.kind.is_substitute(),
                params: model.params.clone(),
                scores,
                confusion,
            });
            models.push(model);
        }
        results.push(TaskResult {
            task: task.to_string(),
            classes: encoder.classes().to_vec(),
            score_mode: sel.mode,
            k_best: sel.k_best,
            rfe: sel.rfe,
            selected_features: chosen.clone(),
            n_train: data.train_x.n_rows(),
            n_test: data.test_x.n_rows(),
            train_class_counts: counts,
            models: model_results,
        });
        transforms.encoders.insert(task.to_string(), encoder.clone());
        transforms
            .scalers
            .insert(task.to_string(), data.scaler.project(&chosen).map_err(stage("scale"))?);
        all_models.insert(task.to_string(), models);
        test_sets.insert(task.to_string(), (test_x, data.test_y.clone()));
    }

    let mut stage_seeds = BTreeMap::new();
    let mut names: Vec<String> = ["augment", "split", "smote.ddos", "smote.latency"].map(String::from).to_vec();
    if cfg.generate.is_some() {
        names.push("generate".into());
    }
    names.extend(specs.iter().map(|s| format!("model.{}", s.kind)));
    for n in names {
        stage_seeds.insert(n.clone(), cfg.stage_seed(&n));
    }
    let label_counts = ingest::label_counts(&prepared.table, &cfg.augment.label_column).map_err(stage("report"))?;
    let manifest = RunManifest {
        version: report::MANIFEST_VERSION,
        mode: cfg.mode.as_str().to_string(),
        leakage_warning: (cfg.mode == Mode::PaperFaithful).then(|| LEAKAGE_WARNING.to_string()),
        averaging: report::AVERAGING.to_string(),
        prng: seed::PRNG_NAME.to_string(),
        master_seed: cfg.master_seed,
        stage_seeds,
        config: cfg.snapshot(),
        rows_loaded: prepared.rows_loaded,
        rows_after_cleaning: prepared.table.n_rows(),
        label_counts,
        tasks: results,
    };
    Ok(RunOutput { manifest, models: all_models, test_sets, transforms })
}

/// Runs the pipeline and writes results, plot data, charts and (when
/// `save_models` is set) models, test sets and transforms under `output_dir`.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunManifest, PipelineError> {
    let out = execute(cfg)?;
    let dir = &cfg.output_dir;
    report::emit(&out.manifest, dir, EmitFormats::default()).map_err(stage("emit"))?;
    if cfg.save_models {
        save_artifacts(&out, dir)?;
    }
    Ok(out.manifest)
}

pub fn model_path(dir: &Path, task: &str, kind: ModelKind) -> PathBuf {
    dir.join("models").join(task).join(format!("{kind}.json"))
}

pub fn test_set_path(dir: &Path, task: &str) -> PathBuf {
    dir.join("data").join(format!("test_{task}.csv"))
}

fn save_artifacts(out: &RunOutput, dir: &Path) -> Result<(), PipelineError> {
    let io = |p: &Path| {
        let path = p.to_path_buf();
        move |e: std::io::Error| PipelineError::Stage {
            stage: "emit".into(),
            source: format!("{}: {e}", path.display()).into(),
        }
    };
    for (task, models) in &out.models {
        let mdir = dir.join("models").join(task);
        std::fs::create_dir_all(&mdir).map_err(io(&mdir))?;
        for m in models {
            m.save(&model_path(dir, task, m.spec.kind)).map_err(stage("emit"))?;
        }
    }
    let ddir = dir.join("data");
    std::fs::create_dir_all(&ddir).map_err(io(&ddir))?;
    for (task, (x, y)) in &out.test_sets {
        let labels = out.transforms.encoders[task].decode(y).map_err(stage("emit"))?;
        let t = x.with_string_column(TARGET_COLUMN, labels).map_err(stage("emit"))?;
        ingest::write_csv(&t, &test_set_path(dir, task), None).map_err(stage("emit"))?;
    }
    out.transforms.save(&dir.join(TRANSFORMS_FILE)).map_err(stage("emit"))?;
    Ok(())
}

/// Reloads a saved model and its task's test set from a run directory
/// and recomputes the scores.
pub fn rescore(dir: &Path, task: &str, kind: ModelKind) -> Result<ScoreSet, PipelineError> {
    let transforms = TransformSet::load(&dir.join(TRANSFORMS_FILE)).map_err(stage("score"))?;
    let encoder = transforms
        .encoders
        .get(task)
        .ok_or_else(|| PipelineError::config("task", format!("no task `{task}` in {TRANSFORMS_FILE}")))?;
    let model = TrainedModel::load(&model_path(dir, task, kind)).map_err(stage("score"))?;
    let table = ingest::load_csv_with(&test_set_path(dir, task), usize::MAX, TARGET_COLUMN, &[TARGET_COLUMN.to_string()])
        .map_err(stage("score"))?;
    let y = encoder.encode(table.string_column(TARGET_COLUMN).unwrap_or_default()).map_err(stage("score"))?;
    let x = table.select_columns(&model.feature_names).map_err(stage("score"))?;
    let pred = learners::predict(&model, &x).map_err(stage("score"))?;
    let cm = report::confusion(&y, &pred, encoder.n_classes()).map_err(stage("score"))?;
    report::scores(&cm).map_err(stage("score"))
}
