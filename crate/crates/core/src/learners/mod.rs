//! The eight-model classifier suite behind one fit/predict interface.
//!
//! `predict` is defined as the argmax of `predict_proba` (ties go to the
//! smallest class code) for every kind, so the two can never disagree.

pub mod adaboost;
pub mod forest;
pub mod knn;
pub mod logistic;
pub mod matrix;
pub mod mlp;
pub mod naive_bayes;
pub mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tabular::FeatureTable;
use adaboost::{AdaBoost, AdaBoostParams};
use forest::{Forest, ForestParams};
use knn::Knn;
use logistic::{Logistic, LogisticParams};
pub use matrix::Matrix;
use matrix::argmax;
use mlp::{Mlp, MlpParams};
use naive_bayes::GaussianNb;
use tree::{Tree, TreeParams};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("training labels must cover every code 0..{n_classes}; code {missing} is absent")]
    NonContiguousLabels { n_classes: usize, missing: usize },
    #[error("non-finite value in the feature matrix")]
    NonFiniteInput,
    #[error("{0}")]
    DegenerateHyperparameter(String),
    #[error("{features} feature rows but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("feature mismatch: model expects {expected:?}, got {actual:?}")]
    FeatureMismatch { expected: Vec<String>, actual: Vec<String> },
    #[error("model is not fitted")]
    UnfittedModel,
    #[error("unknown model kind `{0}`")]
    UnknownKind(String),
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    DecisionTree,
    RandomForest,
    Adaboost,
    Knn,
    GaussianNb,
    LogisticRegression,
    FeedforwardNet,
    ExtraTrees,
}

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        ModelKind::DecisionTree,
        ModelKind::RandomForest,
        ModelKind::Adaboost,
        ModelKind::Knn,
        ModelKind::GaussianNb,
        ModelKind::LogisticRegression,
        ModelKind::FeedforwardNet,
        ModelKind::ExtraTrees,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::DecisionTree => "decision_tree",
            ModelKind::RandomForest => "random_forest",
            ModelKind::Adaboost => "adaboost",
            ModelKind::Knn => "knn",
            ModelKind::GaussianNb => "gaussian_nb",
            ModelKind::LogisticRegression => "logistic_regression",
            ModelKind::FeedforwardNet => "feedforward_net",
            ModelKind::ExtraTrees => "extra_trees",
        }
    }

    /// Models not named in the source study but chosen to fill out the suite.
    pub fn is_substitute(self) -> bool {
        matches!(self, ModelKind::GaussianNb | ModelKind::LogisticRegression | ModelKind::ExtraTrees)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = LearnError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| LearnError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HyperValue {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, HyperValue>,
    #[serde(default)]
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, seed: u64) -> Self {
        Self { kind, hyperparameters: BTreeMap::new(), seed }
    }

    pub fn with(mut self, key: &str, value: HyperValue) -> Self {
        self.hyperparameters.insert(key.to_string(), value);
        self
    }

    /// Applies defaults and validates every hyperparameter.
    pub fn resolve(&self) -> Result<ResolvedParams, LearnError> {
        let mut h = Hyper { kind: self.kind, map: &self.hyperparameters, used: Vec::new() };
        let out = match self.kind {
            ModelKind::DecisionTree => ResolvedParams::DecisionTree(TreeParams {
                max_depth: h.count("max_depth", 16)?,
                min_samples_leaf: h.count("min_samples_leaf", 2)?,
                max_features: None,
                random_thresholds: false,
            }),
            ModelKind::RandomForest | ModelKind::ExtraTrees => {
                let extra = self.kind == ModelKind::ExtraTrees;
                ResolvedParams::Forest {
                    n_trees: h.count("n_trees", 100)?,
                    max_depth: h.count("max_depth", 16)?,
                    min_samples_leaf: h.count("min_samples_leaf", 2)?,
                    max_features: h.max_features()?,
                    bootstrap: h.flag("bootstrap", !extra)?,
                    random_thresholds: extra,
                }
            }
            ModelKind::Adaboost => ResolvedParams::Adaboost(AdaBoostParams {
                n_rounds: h.count("n_rounds", 100)?,
                learning_rate: h.positive("learning_rate", 1.0)?,
                max_depth: h.count("max_depth", 2)?,
            }),
            ModelKind::Knn => ResolvedParams::Knn { k: h.count("k", 5)? },
            ModelKind::GaussianNb => ResolvedParams::GaussianNb { var_smoothing: h.nonnegative("var_smoothing", 1e-9)? },
            ModelKind::LogisticRegression => ResolvedParams::LogisticRegression(LogisticParams {
                learning_rate: h.positive("learning_rate", 0.5)?,
                n_iterations: h.count("n_iterations", 300)?,
                l2: h.nonnegative("l2", 1e-4)?,
            }),
            ModelKind::FeedforwardNet => ResolvedParams::FeedforwardNet(MlpParams {
                hidden: h.count("hidden", 64)?,
                epochs: h.count("epochs", 20)?,
                batch_size: h.count("batch_size", 128)?,
                learning_rate: h.positive("learning_rate", 0.005)?,
                l2: h.nonnegative("l2", 1e-4)?,
            }),
        };
        h.reject_unknown()?;
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> Option<usize> {
        match self {
            MaxFeatures::All => None,
            MaxFeatures::Sqrt => Some(((n_features as f64).sqrt().floor() as usize).max(1)),
            MaxFeatures::Count(c) => Some(c.min(n_features)),
        }
    }
}

struct Hyper<'a> {
    kind: ModelKind,
    map: &'a BTreeMap<String, HyperValue>,
    used: Vec<&'static str>,
}

impl Hyper<'_> {
    fn bad(&self, key: &str, why: &str) -> LearnError {
        LearnError::DegenerateHyperparameter(format!("{}.{key}: {why}", self.kind))
    }

    fn get(&mut self, key: &'static str) -> Option<&HyperValue> {
        self.used.push(key);
        self.map.get(key)
    }

    fn count(&mut self, key: &'static str, default: usize) -> Result<usize, LearnError> {
        let v = match self.get(key) {
            None => default,
            Some(HyperValue::Int(i)) if *i >= 1 => *i as usize,
            Some(HyperValue::Float(f)) if *f >= 1.0 && f.fract() == 0.0 => *f as usize,
            Some(_) => return Err(self.bad(key, "must be an integer >= 1")),
        };
        Ok(v)
    }

    fn float(&mut self, key: &'static str, default: f64) -> Result<f64, LearnError> {
        match self.get(key) {
            None => Ok(default),
            Some(HyperValue::Int(i)) => Ok(*i as f64),
            Some(HyperValue::Float(f)) => Ok(*f),
            Some(_) => Err(self.bad(key, "must be a number")),
        }
    }

    fn positive(&mut self, key: &'static str, default: f64) -> Result<f64, LearnError> {
        let v = self.float(key, default)?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.bad(key, "must be > 0"))
        }
    }

    fn nonnegative(&mut self, key: &'static str, default: f64) -> Result<f64, LearnError> {
        let v = self.float(key, default)?;
        if v >= 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.bad(key, "must be >= 0"))
        }
    }

    fn flag(&mut self, key: &'static str, default: bool) -> Result<bool, LearnError> {
        match self.get(key) {
            None => Ok(default),
            Some(HyperValue::Bool(b)) => Ok(*b),
            Some(_) => Err(self.bad(key, "must be true or false")),
        }
    }

    fn max_features(&mut self) -> Result<MaxFeatures, LearnError> {
        match self.get("max_features") {
            None => Ok(MaxFeatures::Sqrt),
            Some(HyperValue::Text(t)) if t == "sqrt" => Ok(MaxFeatures::Sqrt),
            Some(HyperValue::Text(t)) if t == "all" => Ok(MaxFeatures::All),
            Some(HyperValue::Int(i)) if *i >= 1 => Ok(MaxFeatures::Count(*i as usize)),
            Some(_) => Err(self.bad("max_features", "must be \"sqrt\", \"all\" or an integer >= 1")),
        }
    }

    fn reject_unknown(&self) -> Result<(), LearnError> {
        match self.map.keys().find(|k| !self.used.contains(&k.as_str())) {
            Some(k) => Err(self.bad(k, "unknown hyperparameter")),
            None => Ok(()),
        }
    }
}

/// Hyperparameters after defaults, as recorded in run manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResolvedParams {
    DecisionTree(TreeParams),
    Forest {
        n_trees: usize,
        max_depth: usize,
        min_samples_leaf: usize,
        max_features: MaxFeatures,
        bootstrap: bool,
        random_thresholds: bool,
    },
    Adaboost(AdaBoostParams),
    Knn { k: usize },
    GaussianNb { var_smoothing: f64 },
    LogisticRegression(LogisticParams),
    FeedforwardNet(MlpParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelState {
    Tree(Tree),
    Forest(Forest),
    Adaboost(AdaBoost),
    Knn(Knn),
    GaussianNb(GaussianNb),
    Logistic(Logistic),
    Mlp(Mlp),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub params: ResolvedParams,
    pub state: ModelState,
    pub classes: Vec<usize>,
    pub feature_names: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    model: TrainedModel,
}

fn check_labels(y: &[usize]) -> Result<usize, LearnError> {
    let n_classes = y.iter().copied().max().map_or(0, |m| m + 1);
    let mut seen = vec![false; n_classes];
    for &c in y {
        seen[c] = true;
    }
    if seen.iter().filter(|s| **s).count() < 2 {
        return Err(LearnError::SingleClass);
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(LearnError::NonContiguousLabels { n_classes, missing });
    }
    Ok(n_classes)
}

pub fn fit(spec: &ModelSpec, x: &FeatureTable, y: &[usize]) -> Result<TrainedModel, LearnError> {
    fit_matrix(spec, x.column_names(), &Matrix::from_table(x), y)
}

pub fn fit_matrix(
    spec: &ModelSpec,
    feature_names: Vec<String>,
    x: &Matrix,
    y: &[usize],
) -> Result<TrainedModel, LearnError> {
    if x.rows() != y.len() {
        return Err(LearnError::LengthMismatch { features: x.rows(), labels: y.len() });
    }
    if !x.all_finite() {
        return Err(LearnError::NonFiniteInput);
    }
    let k = check_labels(y)?;
    let params = spec.resolve()?;
    let state = match &params {
        ResolvedParams::DecisionTree(p) => {
            let mut samples: Vec<usize> = (0..y.len()).collect();
            let cols = x.to_columns();
            ModelState::Tree(Tree::fit_classifier(&cols, y, &vec![1.0; y.len()], k, &mut samples, p, None))
        }
        ResolvedParams::Forest { n_trees, max_depth, min_samples_leaf, max_features, bootstrap, random_thresholds } => {
            let fp = ForestParams {
                n_trees: *n_trees,
                bootstrap: *bootstrap,
                tree: TreeParams {
                    max_depth: *max_depth,
                    min_samples_leaf: *min_samples_leaf,
                    max_features: max_features.resolve(x.cols()),
                    random_thresholds: *random_thresholds,
                },
            };
            ModelState::Forest(Forest::fit(&x.to_columns(), y, k, &fp, spec.seed))
        }
        ResolvedParams::Adaboost(p) => ModelState::Adaboost(AdaBoost::fit(&x.to_columns(), y, k, p)),
        ResolvedParams::Knn { k: nn } => ModelState::Knn(Knn::fit(x, y, k, *nn)),
        ResolvedParams::GaussianNb { var_smoothing } => ModelState::GaussianNb(GaussianNb::fit(x, y, k, *var_smoothing)),
        ResolvedParams::LogisticRegression(p) => ModelState::Logistic(Logistic::fit(x, y, k, p)),
        ResolvedParams::FeedforwardNet(p) => ModelState::Mlp(Mlp::fit(x, y, k, p, spec.seed)),
    };
    Ok(TrainedModel { spec: spec.clone(), params, state, classes: (0..k).collect(), feature_names })
}

impl TrainedModel {
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    fn proba_row(&self, x: &[f64], out: &mut [f64]) {
        match &self.state {
            ModelState::Tree(t) => out.copy_from_slice(t.leaf_value(x)),
            ModelState::Forest(f) => f.proba_row(x, out),
            ModelState::Adaboost(a) => a.proba_row(x, out),
            ModelState::Knn(m) => m.proba_row(x, out),
            ModelState::GaussianNb(m) => m.proba_row(x, out),
            ModelState::Logistic(m) => m.proba_row(x, out),
            ModelState::Mlp(m) => m.proba_row(x, out),
        }
    }

    pub fn predict_proba_matrix(&self, x: &Matrix) -> Result<Matrix, LearnError> {
        if x.cols() != self.feature_names.len() {
            return Err(LearnError::FeatureMismatch {
                expected: self.feature_names.clone(),
                actual: vec![format!("<{} unnamed columns>", x.cols())],
            });
        }
        let k = self.n_classes();
        let mut out = Matrix::zeros(x.rows(), k);
        if k == 0 {
            return Ok(out);
        }
        out.as_mut_slice()
            .par_chunks_mut(k)
            .enumerate()
            .for_each(|(i, row)| self.proba_row(x.row(i), row));
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<(), LearnError> {
        let file = ModelFile { version: MODEL_FORMAT_VERSION, model: self.clone() };
        std::fs::write(path, serde_json::to_string(&file)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, LearnError> {
        let file: ModelFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if file.version != MODEL_FORMAT_VERSION {
            return Err(LearnError::UnsupportedVersion(file.version));
        }
        Ok(file.model)
    }
}

fn check_features(model: &TrainedModel, x: &FeatureTable) -> Result<(), LearnError> {
    let actual = x.column_names();
    if actual != model.feature_names {
        return Err(LearnError::FeatureMismatch { expected: model.feature_names.clone(), actual });
    }
    Ok(())
}

/// Rows x classes probability matrix; each row sums to 1.
pub fn predict_proba(model: &TrainedModel, x: &FeatureTable) -> Result<Matrix, LearnError> {
    check_features(model, x)?;
    model.predict_proba_matrix(&Matrix::from_table(x))
}

pub fn predict(model: &TrainedModel, x: &FeatureTable) -> Result<Vec<usize>, LearnError> {
    let p = predict_proba(model, x)?;
    Ok((0..p.rows()).map(|i| argmax(p.row(i))).collect())
}

pub fn predict_matrix(model: &TrainedModel, x: &Matrix) -> Result<Vec<usize>, LearnError> {
    let p = model.predict_proba_matrix(x)?;
    Ok((0..p.rows()).map(|i| argmax(p.row(i))).collect())
}

/// Default suite: all eight kinds with default hyperparameters.
pub fn default_suite(seed: u64) -> Vec<ModelSpec> {
    ModelKind::ALL.iter().map(|&k| ModelSpec::new(k, seed)).collect()
}

#[cfg(test)]
mod tests;
