//! Label encoding, non-finite handling, column dropping, z-score scaling
//! and the stratified train/test split.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed;
use crate::tabular::{stats_of, FeatureTable, TableError};

/// Schema version written into serialized transforms.
pub const TRANSFORM_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("cannot fit an encoder on an empty column")]
    EmptyColumn,
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("unknown code {0}")]
    UnknownCode(usize),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("test_fraction must lie in (0,1), got {0}")]
    InvalidFraction(f64),
    #[error("scaler was fitted on {expected:?}, table has {actual:?}")]
    ScalerMismatch { expected: Vec<String>, actual: Vec<String> },
    #[error("unsupported transform version {0}")]
    UnsupportedVersion(u32),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Table(#[from] TableError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "EncoderRepr", into = "EncoderRepr")]
pub struct LabelEncoder {
    classes: Vec<String>,
    code_of: BTreeMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct EncoderRepr {
    classes: Vec<String>,
}

impl From<EncoderRepr> for LabelEncoder {
    fn from(r: EncoderRepr) -> Self {
        Self::from_classes(r.classes)
    }
}

impl From<LabelEncoder> for EncoderRepr {
    fn from(e: LabelEncoder) -> Self {
        Self { classes: e.classes }
    }
}

impl LabelEncoder {
    /// Codes `0..k` in lexicographic (byte-wise) class order.
    pub fn fit<S: AsRef<str>>(labels: &[S]) -> Result<Self, PreprocessError> {
        if labels.is_empty() {
            return Err(PreprocessError::EmptyColumn);
        }
        let mut classes: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
        classes.sort();
        classes.dedup();
        Ok(Self::from_classes(classes))
    }

    fn from_classes(classes: Vec<String>) -> Self {
        let code_of = classes.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        Self { classes, code_of }
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn code_of(&self, label: &str) -> Option<usize> {
        self.code_of.get(label).copied()
    }

    pub fn label_of(&self, code: usize) -> Option<&str> {
        self.classes.get(code).map(String::as_str)
    }

    pub fn encode<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>, PreprocessError> {
        labels
            .iter()
            .map(|l| self.code_of(l.as_ref()).ok_or_else(|| PreprocessError::UnknownClass(l.as_ref().into())))
            .collect()
    }

    pub fn decode(&self, codes: &[usize]) -> Result<Vec<String>, PreprocessError> {
        codes
            .iter()
            .map(|&c| self.label_of(c).map(str::to_string).ok_or(PreprocessError::UnknownCode(c)))
            .collect()
    }
}

/// Names of numeric columns holding any NaN or ±inf, in table order.
pub fn find_nonfinite_columns(table: &FeatureTable) -> Vec<String> {
    table
        .columns()
        .iter()
        .filter(|c| c.values.iter().any(|v| !v.is_finite()))
        .map(|c| c.name.clone())
        .collect()
}

/// Mask of rows whose numeric cells are all finite.
pub fn finite_row_mask(table: &FeatureTable) -> Vec<bool> {
    (0..table.n_rows())
        .map(|i| table.columns().iter().all(|c| c.values[i].is_finite()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CleanPolicy {
    #[default]
    DropRows,
    MedianImpute,
}

fn finite_median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

/// Drops the listed columns, then removes or imputes non-finite cells.
/// A column with no finite value imputes to 0.
pub fn drop_and_clean<S: AsRef<str>>(
    table: &FeatureTable,
    drop: &[S],
    policy: CleanPolicy,
) -> Result<FeatureTable, PreprocessError> {
    let kept = table.drop_columns(drop)?;
    match policy {
        CleanPolicy::DropRows => Ok(kept.filter_rows(&finite_row_mask(&kept))?),
        CleanPolicy::MedianImpute => {
            Ok(kept.map_columns(|_, c| {
                if c.values.iter().all(|v| v.is_finite()) {
                    return c.values.clone();
                }
                let med = finite_median(&c.values);
                c.values.iter().map(|&v| if v.is_finite() { v } else { med }).collect()
            }))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnScale {
    pub name: String,
    pub mean: f64,
    /// Population std; stored as 1 when the fitted column was constant.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub columns: Vec<ColumnScale>,
}

impl Scaler {
    pub fn fit(train: &FeatureTable) -> Self {
        let columns = train
            .columns()
            .iter()
            .map(|c| {
                let s = stats_of(&c.name, &c.values);
                let std = if s.std_dev > 0.0 && s.std_dev.is_finite() { s.std_dev } else { 1.0 };
                let mean = if s.mean.is_finite() { s.mean } else { 0.0 };
                ColumnScale { name: c.name.clone(), mean, std }
            })
            .collect();
        Self { columns }
    }

    fn check(&self, table: &FeatureTable) -> Result<(), PreprocessError> {
        let expected: Vec<String> = self.columns.iter().map(|c| c.name.clone()).collect();
        let actual = table.column_names();
        if expected != actual {
            return Err(PreprocessError::ScalerMismatch { expected, actual });
        }
        Ok(())
    }

    pub fn apply(&self, table: &FeatureTable) -> Result<FeatureTable, PreprocessError> {
        self.check(table)?;
        Ok(table.map_columns(|i, c| {
            let s = &self.columns[i];
            c.values.iter().map(|v| (v - s.mean) / s.std).collect()
        }))
    }

    pub fn invert(&self, table: &FeatureTable) -> Result<FeatureTable, PreprocessError> {
        self.check(table)?;
        Ok(table.map_columns(|i, c| {
            let s = &self.columns[i];
            c.values.iter().map(|v| v * s.std + s.mean).collect()
        }))
    }

    /// Restricts to a subset of columns, in the order given.
    pub fn project<S: AsRef<str>>(&self, names: &[S]) -> Result<Self, PreprocessError> {
        let columns = names
            .iter()
            .map(|n| {
                self.columns
                    .iter()
                    .find(|c| c.name == n.as_ref())
                    .cloned()
                    .ok_or_else(|| PreprocessError::MissingColumn(n.as_ref().to_string()))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { columns })
    }
}

pub fn fit_scaler(train: &FeatureTable) -> Scaler {
    Scaler::fit(train)
}

pub fn apply_scaler(scaler: &Scaler, table: &FeatureTable) -> Result<FeatureTable, PreprocessError> {
    scaler.apply(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub stratify_on: String,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { test_fraction: 0.2, stratify_on: crate::schema::LABEL_COLUMN.to_string(), seed: 0 }
    }
}

/// Per-class test count: `round(count * fraction)`, clamped to `[1, count-1]`
/// when the class has at least two rows, and 0 for singleton classes.
pub fn test_count(class_count: usize, fraction: f64) -> usize {
    if class_count < 2 {
        return 0;
    }
    ((class_count as f64 * fraction).round() as usize).clamp(1, class_count - 1)
}

/// Stratified split over arbitrary ordered keys. Returns ascending
/// `(train, test)` row indices.
pub fn stratified_split_indices<K: Ord + Clone>(
    keys: &[K],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), PreprocessError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(PreprocessError::InvalidFraction(test_fraction));
    }
    let mut groups: BTreeMap<K, Vec<usize>> = BTreeMap::new();
    for (i, k) in keys.iter().enumerate() {
        groups.entry(k.clone()).or_default().push(i);
    }
    let mut train = Vec::with_capacity(keys.len());
    let mut test = Vec::new();
    for (g, (_, mut rows)) in groups.into_iter().enumerate() {
        let n_test = test_count(rows.len(), test_fraction);
        rows.shuffle(&mut seed::stream_rng(seed, g as u64));
        test.extend_from_slice(&rows[..n_test]);
        train.extend_from_slice(&rows[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn stratified_split(
    table: &FeatureTable,
    spec: &SplitSpec,
) -> Result<(FeatureTable, FeatureTable), PreprocessError> {
    let keys = table
        .string_column(&spec.stratify_on)
        .ok_or_else(|| PreprocessError::MissingColumn(spec.stratify_on.clone()))?;
    let (train, test) = stratified_split_indices(keys, spec.test_fraction, spec.seed)?;
    Ok((table.take_rows(&train), table.take_rows(&test)))
}

/// On-disk form of the fitted transforms of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSet {
    pub version: u32,
    pub encoders: BTreeMap<String, LabelEncoder>,
    pub scalers: BTreeMap<String, Scaler>,
}

impl TransformSet {
    pub fn new() -> Self {
        Self { version: TRANSFORM_VERSION, encoders: BTreeMap::new(), scalers: BTreeMap::new() }
    }

    pub fn save(&self, path: &Path) -> Result<(), PreprocessError> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, PreprocessError> {
        let t: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if t.version != TRANSFORM_VERSION {
            return Err(PreprocessError::UnsupportedVersion(t.version));
        }
        Ok(t)
    }
}

impl Default for TransformSet {
    fn default() -> Self {
        Self::new()
    }
}
